#include "thin_epi/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "thin_epi/quadrature.hpp"

namespace thin_epi {

namespace {

constexpr double kLogStep = 0.08664339756999316;  // ln 2 / 8

// Grid-backed fields are only piecewise smooth, so a coarse sphere rule is
// enough and keeps per-radius work small.
const SphereQuadrature& quadrature_for(const FieldSource& v) {
  if (v.grid_h <= 0) return default_quadrature(v.n);
  static const SphereQuadrature q1 = cell_quadrature(*build_grid(1, 256), 4);
  static const SphereQuadrature q2 = cell_quadrature(*build_grid(2, 48), 4);
  return v.n == 1 ? q1 : q2;
}

double fd_step(const FieldSource& v, double r) { return v.grid_h > 0 ? 0.5 * v.grid_h : 1e-5 * r; }

void check_center(const FieldSource& v, const Vec3& x0) {
  require(static_cast<bool>(v.value), "frequency: field has no values");
  require(v.n == 1 || v.n == 2, "frequency: unsupported dimension");
  require(x0[v.n] == 0.0, "frequency: the center must lie on the thin set");
}

void check_radius(const FieldSource& v, const Vec3& x0, double r, double outer) {
  require(r > 0, "frequency: radii must be positive");
  if (v.grid_h > 0 && r < 3.0 * v.grid_h) {
    std::ostringstream os;
    os << "frequency: radius " << r << " is below three grid cells (h = " << v.grid_h << ")";
    fail(ErrorCode::Resolution, os.str());
  }
  if (norm(x0) + outer + fd_step(v, r) > v.reach + 1e-12) {
    std::ostringstream os;
    os << "frequency: B_" << outer << " around the center leaves the domain of the field";
    fail(ErrorCode::Resolution, os.str());
  }
}

double radial_derivative(const FieldSource& v, const Vec3& x0, const Vec3& w, double r, double s) {
  return (v.value(x0 + (r + s) * w) - v.value(x0 + (r - s) * w)) / (2.0 * s);
}

// Ambient gradient by differences; the x_{n+1} slot is one-sided near the
// plane so the kink across it is never straddled.
Vec3 fd_gradient(const FieldSource& v, const Vec3& x, double s) {
  Vec3 g{0, 0, 0};
  for (int a = 0; a <= v.n; ++a) {
    Vec3 xp = x, xm = x;
    if (a == v.n && std::abs(x[a]) < 2.0 * s) {
      const double sg = x[a] >= 0 ? 1.0 : -1.0;
      Vec3 x1 = x, x2 = x;
      x1[a] += sg * s;
      x2[a] += 2.0 * sg * s;
      g[a] = sg * (-3.0 * v.value(x) + 4.0 * v.value(x1) - v.value(x2)) / (2.0 * s);
      continue;
    }
    xp[a] += s;
    xm[a] -= s;
    g[a] = (v.value(xp) - v.value(xm)) / (2.0 * s);
  }
  return g;
}

double sphere_mean_H(const FieldSource& v, const Vec3& x0, double r) {
  const SphereQuadrature& q = quadrature_for(v);
  return q.integrate([&](const Vec3& w) {
    double a = v.value(x0 + r * w);
    return a * a;
  });
}

struct RadiusData {
  double H = 0, I = 0;
  double split = 0;  // int_{S^n} (grad v_r . nu - mu v_r)^2
  double wz = 0;     // W_mu(z_r)
};

RadiusData radius_data(const FieldSource& v, const Vec3& x0, double r, double mu, bool weiss) {
  const SphereQuadrature& q = quadrature_for(v);
  const double s = fd_step(v, r);
  const int n = v.n;
  RadiusData d;
  double grad2 = 0, mass = 0;
  for (std::size_t k = 0; k < q.points.size(); ++k) {
    const Vec3& w = q.points[k];
    const double wt = q.weights[k];
    const Vec3 x = x0 + r * w;
    const double a = v.value(x);
    const double dr = radial_derivative(v, x0, w, r, s);
    d.H += wt * a * a;
    d.I += wt * a * dr;
    if (!weiss) continue;
    const double e = r * dr - mu * a;
    d.split += wt * e * e;
    Vec3 g = fd_gradient(v, x, s);
    const double gn = dot(g, w);
    Vec3 t = g - gn * w;
    grad2 += wt * r * r * dot(t, t);
    mass += wt * a * a;
  }
  const double rn = std::pow(r, n);
  d.H *= rn;
  d.I *= rn;
  if (weiss) {
    const double r2mu = std::pow(r, 2.0 * mu);
    d.split /= r2mu;
    grad2 /= r2mu;
    mass /= r2mu;
    d.wz = (grad2 + mu * mu * mass) / (n + 2.0 * mu - 1.0) - mu * mass;
  }
  return d;
}

double weiss_tilde_from(double H, double I, double r, double mu, int n) {
  return (r * I - mu * H) / std::pow(r, n + 2.0 * mu);
}

double ball_source_integral(const FieldSource& v, const Vec3& x0, double r) {
  if (!v.rhs) return 0.0;
  const SphereQuadrature& q = quadrature_for(v);
  Rule1D g = gauss_legendre(16, 0.0, r);
  double total = 0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double rho = g.x[i];
    total += g.w[i] * std::pow(rho, v.n) * q.integrate([&](const Vec3& w) {
      Vec3 x = x0 + rho * w;
      return v.value(x) * v.rhs(x);
    });
  }
  return total;
}

void check_decreasing(const std::vector<double>& radii, const char* who) {
  require(!radii.empty(), std::string(who) + ": no radii given");
  for (std::size_t i = 1; i < radii.size(); ++i)
    require(radii[i] < radii[i - 1], std::string(who) + ": radii must be strictly decreasing");
}

// Sample directions for sup norms over balls and annuli.
std::vector<Vec3> sup_directions(const FieldSource& v) {
  const SphereQuadrature& q = quadrature_for(v);
  const std::size_t stride = std::max<std::size_t>(1, q.points.size() / 2000);
  std::vector<Vec3> out;
  for (std::size_t k = 0; k < q.points.size(); k += stride) out.push_back(q.points[k]);
  for (const Vec3& w : q.equator_points) out.push_back(w);
  return out;
}

Vec3 fold(const Vec3& x, int n) {
  Vec3 y = x;
  y[n] = std::abs(y[n]);
  return y;
}

class FieldTrace final : public SphereFunction {
 public:
  explicit FieldTrace(FieldSource v) : v_(std::move(v)) {}
  double value(const Vec3& w) const override { return v_.value(w); }
  Vec3 gradient(const Vec3& w) const override {
    Vec3 g = fd_gradient(v_, w, 1e-6);
    return g - dot(g, w) * w;
  }

 private:
  FieldSource v_;
};

std::string format_label(double mu) {
  std::ostringstream os;
  os << mu;
  return os.str();
}

}  // namespace

FieldSource field_from(const BallFunction& v, double reach) {
  FieldSource f;
  f.n = v.n();
  f.value = [v](const Vec3& x) { return v.value(x); };
  f.reach = reach;
  return f;
}

FieldSource field_from(const GridSolution& sol) {
  auto s = std::make_shared<const GridSolution>(sol);
  FieldSource f;
  f.n = sol.n;
  f.value = [s](const Vec3& x) { return s->value(x); };
  f.grid_h = sol.h;
  f.reach = 1.0;
  return f;
}

FieldSource field_from(const Reduction& red, const GridSolution& sol) {
  FieldSource f;
  f.n = sol.n;
  f.value = red.v;
  f.rhs = red.h;
  f.grid_h = sol.h;
  f.reach = 1.0;
  return f;
}

std::vector<double> radii_ladder(double r_max, double r_min, int per_octave) {
  require(r_max > 0 && r_min > 0 && per_octave > 0, "radii_ladder: invalid arguments");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    double r = r_max * std::pow(2.0, -static_cast<double>(i) / per_octave);
    if (r < r_min * (1.0 - 1e-12)) break;
    out.push_back(r);
  }
  return out;
}

SurfaceMoments surface_moments(const FieldSource& v, const Vec3& x0, double r) {
  check_center(v, x0);
  check_radius(v, x0, r, r);
  RadiusData d = radius_data(v, x0, r, 0.0, false);
  return {d.H, d.I};
}

FrequencyProfile truncated_frequency(const FieldSource& v, const Vec3& x0, const FrequencyParams& params,
                                     const std::vector<double>& radii) {
  check_center(v, x0);
  check_decreasing(radii, "truncated_frequency");
  require(params.theta > 0 && params.theta < params.gamma, "truncated_frequency: theta must lie in (0, gamma)");
  const int n = v.n;
  const double eup = std::exp(kLogStep);
  for (double r : radii) check_radius(v, x0, r / eup, r * eup);

  FrequencyProfile P;
  P.n = n;
  P.x0 = x0;
  P.params = params;
  P.radii = radii;
  const double texp = n + 2.0 * (params.k + params.gamma - params.theta);
  auto floor_at = [&](double rho) { return std::pow(rho, texp); };
  bool any_mass = false;
  for (double r : radii) {
    const bool weiss = params.mu > 0;
    RadiusData d = radius_data(v, x0, r, params.mu, false);
    const double hp = sphere_mean_H(v, x0, r * eup) * std::pow(r * eup, n);
    const double hm = sphere_mean_H(v, x0, r / eup) * std::pow(r / eup, n);
    const double lp = std::log(std::max(hp, floor_at(r * eup)));
    const double lm = std::log(std::max(hm, floor_at(r / eup)));
    const double factor = 1.0 + params.C_phi * std::pow(r, params.theta);
    any_mass = any_mass || d.H > 0;
    P.H.push_back(d.H);
    P.I.push_back(d.I);
    P.Phi.push_back(factor * (lp - lm) / (2.0 * kLogStep));
    P.Phi_moments.push_back(d.H > 0 ? factor * (n + 2.0 * r * d.I / d.H) : std::nan(""));
    P.truncated.push_back(d.H < floor_at(r));
    P.reliable.push_back(v.grid_h <= 0 || r >= params.reliable_cells * v.grid_h);
    if (weiss) {
      double wt = weiss_tilde_from(d.H, d.I, r, params.mu, n);
      P.W_tilde.push_back(wt);
      P.W.push_back(wt - ball_source_integral(v, x0, r) / std::pow(r, n + 2.0 * params.mu - 1.0));
    }
  }
  if (!any_mass) fail(ErrorCode::Precondition, "truncated_frequency: the field vanishes on every sphere");

  for (std::size_t i = 1; i < radii.size(); ++i) {
    const double jump = P.Phi[i] - P.Phi[i - 1];
    const bool both = P.reliable[i] && P.reliable[i - 1];
    if (both) P.max_violation = std::max(P.max_violation, jump);
    if (jump > 1e-10) {
      std::ostringstream os;
      os << "Phi increases by " << jump << " from r = " << radii[i - 1] << " to r = " << radii[i]
         << (both ? "" : " (unreliable radius)");
      P.violations.push_back(os.str());
    }
    if (params.mu > 0 && both) {
      const double a = P.H[i - 1] / std::pow(radii[i - 1], n + 2.0 * params.mu);
      const double b = P.H[i] / std::pow(radii[i], n + 2.0 * params.mu);
      if (a > 0) P.max_h_ratio_violation = std::max(P.max_h_ratio_violation, (b - a) / a);
    }
  }
  return P;
}

std::optional<double> frequency_plateau(const FrequencyProfile& prof) {
  std::vector<double> vals;
  for (std::size_t i = prof.radii.size(); i-- > 0 && vals.size() < 5;) {
    if (!prof.reliable[i]) continue;
    const double r = prof.radii[i];
    const double factor = 1.0 + prof.params.C_phi * std::pow(r, prof.params.theta);
    vals.push_back(0.5 * (prof.Phi[i] / factor - prof.n));
  }
  if (vals.size() < 5) return std::nullopt;
  std::sort(vals.begin(), vals.end());
  return vals[2];
}

std::optional<double> frequency_label(double plateau, const std::vector<double>& candidates, double tol) {
  std::optional<double> best;
  for (double c : candidates) {
    if (std::abs(plateau - c) > tol) continue;
    if (!best || std::abs(plateau - c) < std::abs(plateau - *best)) best = c;
  }
  return best;
}

Rescaled rescale(const FieldSource& v, const Vec3& x0, double r, RescaleMode mode, double mu, double rho) {
  check_center(v, x0);
  require(r > 0 && rho > 0, "rescale: radii must be positive");
  Rescaled out;
  double scale = 1.0, factor = 1.0;
  double norm_at = 0;
  switch (mode) {
    case RescaleMode::L2Normalized:
      norm_at = r;
      break;
    case RescaleMode::Homogeneous:
      factor = std::pow(r, -mu);
      break;
    case RescaleMode::Double:
      norm_at = rho;
      factor = std::pow(r, -mu);
      break;
  }
  if (norm_at > 0) {
    check_radius(v, x0, norm_at, norm_at);
    out.normalizer = std::sqrt(sphere_mean_H(v, x0, norm_at));
    if (!(out.normalizer > 0)) fail(ErrorCode::Precondition, "rescale: the field vanishes on the normalizing sphere");
    factor /= out.normalizer;
  }
  scale = mode == RescaleMode::Double ? rho * r : r;
  FieldSource f;
  f.n = v.n;
  Field base = v.value;
  f.value = [base, x0, scale, factor](const Vec3& x) { return factor * base(x0 + scale * x); };
  if (v.rhs) {
    Field h = v.rhs;
    f.rhs = [h, x0, scale, factor](const Vec3& x) { return factor * scale * scale * h(x0 + scale * x); };
  }
  f.grid_h = v.grid_h / scale;
  f.reach = std::isfinite(v.reach) ? (v.reach - norm(x0)) / scale : v.reach;
  out.field = std::move(f);
  return out;
}

SphericalTrace sample_trace(const FieldSource& v, GridPtr grid) {
  require(grid != nullptr && grid->n == v.n, "sample_trace: grid dimension mismatch");
  require(v.reach >= 1.0, "sample_trace: the field is not defined up to the unit sphere");
  FieldTrace f(v);
  return trace_from_function(std::move(grid), f);
}

WeissMonotonicityReport weiss_monotonicity_check(const FieldSource& v, const Vec3& x0, double mu,
                                                 const std::vector<double>& radii, double C_W, int k, double gamma,
                                                 double slack) {
  check_center(v, x0);
  check_decreasing(radii, "weiss_monotonicity_check");
  require(radii.size() >= 2, "weiss_monotonicity_check: at least two radii required");
  require(mu > 0, "weiss_monotonicity_check: mu must be positive");
  const int n = v.n;
  WeissMonotonicityReport rep;
  rep.mu = mu;
  rep.C_W = C_W;
  rep.radii = radii;
  std::vector<double> F, S;
  for (double r : radii) {
    check_radius(v, x0, r, r);
    RadiusData d = radius_data(v, x0, r, mu, true);
    const double wt = weiss_tilde_from(d.H, d.I, r, mu, n);
    rep.W_tilde.push_back(wt);
    rep.W_z.push_back(d.wz);
    F.push_back(wt + C_W * std::pow(r, k + gamma - mu));
    S.push_back(d.split);
  }
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < radii.size(); ++i) {
    WeissRow row;
    row.r_hi = radii[i - 1];
    row.r_lo = radii[i];
    row.derivative = (F[i - 1] - F[i]) / (row.r_hi - row.r_lo);
    auto radial = [&](std::size_t j) { return 2.0 * S[j] / radii[j]; };
    auto split = [&](std::size_t j) {
      return ((n + 2.0 * mu - 1.0) * (rep.W_z[j] - rep.W_tilde[j]) + S[j]) / radii[j];
    };
    row.bound_radial = 0.5 * (radial(i - 1) + radial(i));
    row.bound_split = 0.5 * (split(i - 1) + split(i));
    const double margin = row.derivative - std::max(row.bound_radial, row.bound_split);
    rep.min_margin = std::min(rep.min_margin, margin);
    if (margin < -slack) {
      std::ostringstream os;
      os << "derivative " << row.derivative << " below bound " << std::max(row.bound_radial, row.bound_split)
         << " on [" << row.r_lo << ", " << row.r_hi << "]";
      rep.violations.push_back(os.str());
    }
    rep.rows.push_back(row);
  }
  return rep;
}

OscillationReport oscillation_bound_check(const FieldSource& v, const Vec3& x0, double mu, double r, double r_prime,
                                          double C_W, int k, double gamma) {
  check_center(v, x0);
  require(r_prime > 0 && r_prime <= r, "oscillation_bound_check: need 0 < r' <= r");
  check_radius(v, x0, r, r);
  check_radius(v, x0, r_prime, r_prime);
  OscillationReport rep;
  rep.r = r;
  rep.r_prime = r_prime;
  const SphereQuadrature& q = quadrature_for(v);
  const double a = std::pow(r, -mu), b = std::pow(r_prime, -mu);
  rep.lhs = q.integrate([&](const Vec3& w) { return std::abs(a * v.value(x0 + r * w) - b * v.value(x0 + r_prime * w)); });
  RadiusData d = radius_data(v, x0, r, mu, false);
  double energy = weiss_tilde_from(d.H, d.I, r, mu, v.n) + C_W * std::pow(r, k + gamma - mu);
  rep.energy_negative = energy < 0;
  rep.rhs_core = std::sqrt(std::log(r / r_prime)) * std::sqrt(std::max(energy, 0.0));
  if (rep.rhs_core > 0)
    rep.constant = rep.lhs / rep.rhs_core;
  else
    rep.constant = rep.lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return rep;
}

BlowupFit blowup_fit(const FieldSource& v, const Vec3& x0, int m, const std::vector<double>& radii,
                     const BlowupOptions& opts) {
  check_center(v, x0);
  check_decreasing(radii, "blowup_fit");
  require(m >= 0, "blowup_fit: m must be nonnegative");
  const int n = v.n;
  const double mu = 2.0 * m + 1.0;
  BlowupFit fit;
  fit.m = m;

  std::vector<double> rs;
  for (double r : radii)
    if (v.grid_h <= 0 || r >= opts.frequency.reliable_cells * v.grid_h) rs.push_back(r);
  if (static_cast<int>(rs.size()) < opts.fit_min_points)
    fail(ErrorCode::Resolution, "blowup_fit: too few reliable radii for a decay fit");
  for (double r : rs) check_radius(v, x0, r, r);

  if (opts.check_label) {
    FrequencyProfile prof = truncated_frequency(v, x0, opts.frequency, radii);
    fit.plateau = frequency_plateau(prof);
    if (!fit.plateau || std::abs(*fit.plateau - mu) > opts.frequency.label_tolerance) {
      std::ostringstream os;
      os << "blowup_fit: frequency plateau ";
      if (fit.plateau)
        os << *fit.plateau;
      else
        os << "unresolved";
      os << " does not match 2m+1 = " << mu;
      fail(ErrorCode::Hypothesis, os.str());
    }
  }

  const std::vector<Polynomial> block = odd_harmonics(n, 2 * m + 1);
  const SphereQuadrature& q = quadrature_for(v);
  auto coefficients_at = [&](double r) {
    Eigen::VectorXd a(block.size());
    const double s = std::pow(r, -mu);
    for (std::size_t j = 0; j < block.size(); ++j)
      a[j] = q.integrate([&](const Vec3& w) { return s * v.value(x0 + r * w) * block[j](fold(w, n)); });
    return a;
  };

  const std::size_t last = rs.size() - 1;
  Eigen::VectorXd a1 = coefficients_at(rs[last]);
  fit.coefficients = a1;
  auto find_radius = [&](double target) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < rs.size(); ++i)
      if (std::abs(rs[i] / target - 1.0) < 1e-6) return i;
    return std::nullopt;
  };
  auto i2 = find_radius(2.0 * rs[last]);
  auto i4 = find_radius(4.0 * rs[last]);
  if (i2 && i4) {
    Eigen::VectorXd a2 = coefficients_at(rs[*i2]), a4 = coefficients_at(rs[*i4]);
    Eigen::VectorXd d1 = a2 - a1, d2 = a4 - a2;
    const double n1 = d1.norm(), n2 = d2.norm();
    if (n1 > 1e-14 && n2 > n1) {
      const double ratio = n2 / n1;
      const double cosang = d1.dot(d2) / (n1 * n2);
      const double alpha = std::log2(ratio);
      if (cosang > 0.9 && alpha > 0.02 && alpha < 4.0) {
        fit.coefficients = a1 - d1 / (ratio - 1.0);
        fit.extrapolated = true;
      }
    }
  }
  Polynomial H;
  for (std::size_t j = 0; j < block.size(); ++j) H += block[j] * fit.coefficients[j];
  fit.fitted = H;

  const Polynomial dH = H.derivative(n);
  const double hs = std::max(1e-300, fit.coefficients.norm());
  fit.in_catalog = true;
  for (const Vec3& w : q.equator_points)
    if (dH(w) > 1e-8 * hs) fit.in_catalog = false;
  if (n == 2) {
    for (int i = 0; i < 360; ++i) {
      double t = 2.0 * kPi * i / 360.0;
      if (dH({std::cos(t), std::sin(t), 0.0}) > 1e-8 * hs) fit.in_catalog = false;
    }
  }

  const std::vector<Vec3> dirs = sup_directions(v);
  const double shells[] = {0.25, 0.5, 0.75, 1.0};
  for (double r : rs) {
    const double s = std::pow(r, -mu);
    double l2 = q.integrate([&](const Vec3& w) {
      double e = s * v.value(x0 + r * w) - H(fold(w, n));
      return e * e;
    });
    double linf = 0;
    for (double rho : shells)
      for (const Vec3& w : dirs) {
        Vec3 x = rho * w;
        linf = std::max(linf, std::abs(s * v.value(x0 + r * x) - H(fold(x, n))));
      }
    fit.radii.push_back(r);
    fit.l2_distance.push_back(std::sqrt(std::max(l2, 0.0)));
    fit.linf_distance.push_back(linf);
  }

  const double dmax = *std::max_element(fit.l2_distance.begin(), fit.l2_distance.end());
  if (dmax < 1e-12) {
    fit.degenerate = true;
    fit.exponent = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < fit.radii.size(); ++i)
    if (fit.l2_distance[i] > 1e-14 * dmax) {
      X.push_back(std::log(fit.radii[i]));
      Y.push_back(std::log(fit.l2_distance[i]));
    }
  if (static_cast<int>(X.size()) < opts.fit_min_points)
    fail(ErrorCode::Resolution, "blowup_fit: too few nonzero distances for a decay fit");
  const double N = static_cast<double>(X.size());
  const double mx = std::accumulate(X.begin(), X.end(), 0.0) / N;
  const double my = std::accumulate(Y.begin(), Y.end(), 0.0) / N;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
  }
  fit.exponent = sxy / sxx;
  fit.constant = std::exp(my - fit.exponent * mx);
  double rss = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double e = Y[i] - (my + fit.exponent * (X[i] - mx));
    rss += e * e;
  }
  fit.exponent_stderr = X.size() > 2 ? std::sqrt(rss / (N - 2.0) / sxx) : 0.0;
  return fit;
}

namespace {

double annulus_sup(const FieldSource& w, const BlowupProfile& p, double r, const std::vector<double>& shells) {
  const double s = std::pow(r, -static_cast<double>(p.degree()));
  double out = 0;
  for (double rho : shells)
    for (const Vec3& d : sup_directions(w)) {
      Vec3 x = rho * d;
      out = std::max(out, std::abs(s * w.value(r * x) - p(x)));
    }
  return out;
}

std::vector<Vec3> zero_set_points(const BlowupProfile& p, double delta) {
  const Polynomial T = operator_T(p);
  std::vector<Vec3> cand;
  if (p.n == 1) {
    cand = {{1, 0, 0}, {-1, 0, 0}};
  } else {
    for (int i = 0; i < 720; ++i) {
      double t = 2.0 * kPi * i / 720.0;
      cand.push_back({std::cos(t), std::sin(t), 0.0});
    }
  }
  std::vector<Vec3> out;
  for (const Vec3& x : cand)
    if (T(x) >= delta) out.push_back(x);
  return out;
}

}  // namespace

VanishingReport vanishing_on_Zdelta_check(const FieldSource& w, double r, const BlowupProfile& p, double delta,
                                          double eta3, double tolerance, int radii_count, double r1) {
  require(w.n == p.n, "vanishing_on_Zdelta_check: dimension mismatch");
  require(r > 0 && radii_count >= 1 && r1 > 0 && r1 < 0.5, "vanishing_on_Zdelta_check: invalid arguments");
  check_radius(w, {0, 0, 0}, 1.5 * r, 1.5 * r);
  VanishingReport rep;
  rep.linf_distance = annulus_sup(w, p, r, {0.25, 0.5, 0.75, 1.0, 1.25, 1.5});
  rep.hypothesis = rep.linf_distance <= eta3;
  if (!rep.hypothesis) return rep;

  const std::vector<Vec3> Z = zero_set_points(p, delta);
  if (Z.empty()) fail(ErrorCode::Precondition, "vanishing_on_Zdelta_check: Z_delta is empty");
  for (int j = 0; j < radii_count; ++j) {
    const double rp = r * std::pow(3.0, -(j + 1.0) / (radii_count + 1.0));
    double sup = 0;
    for (const Vec3& z : Z) sup = std::max(sup, std::abs(w.value(rp * z)));
    rep.radii.push_back(rp);
    rep.sup_on_Zdelta.push_back(sup);
    rep.max_sup = std::max(rep.max_sup, sup);
  }

  // Smallest C with w_r(z + y) <= -(n+1) y_{n+1}^2 + |y'|^2 + C on B_{r1}.
  const int n = p.n;
  const double s = std::pow(r, -static_cast<double>(p.degree()));
  const std::vector<Vec3> dirs = sup_directions(w);
  const std::size_t zstride = std::max<std::size_t>(1, Z.size() / 16);
  rep.barrier_constant = -std::numeric_limits<double>::infinity();
  for (std::size_t iz = 0; iz < Z.size(); iz += zstride) {
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      for (const Vec3& d : dirs) {
        Vec3 y = (f * r1) * d;
        for (int sg : {1, -1}) {
          Vec3 yy = y;
          yy[n] *= sg;
          double barrier = -(n + 1.0) * yy[n] * yy[n];
          for (int a = 0; a < n; ++a) barrier += yy[a] * yy[a];
          rep.barrier_constant = std::max(rep.barrier_constant, s * w.value(r * (Z[iz] + yy)) - barrier);
        }
        if (f == 0.0) break;
      }
    }
  }
  rep.passed = rep.max_sup <= tolerance;
  return rep;
}

LinfL2Report linfty_l2_check(const FieldSource& w, const BlowupProfile& p, double r) {
  require(w.n == p.n, "linfty_l2_check: dimension mismatch");
  check_radius(w, {0, 0, 0}, 2.0 * r, 2.0 * r);
  LinfL2Report rep;
  const int n = p.n;
  rep.sigma = 1.0 / (n + 3.0);
  rep.linf = annulus_sup(w, p, r, {0.25, 0.5, 0.75, 1.0, 1.25, 1.5});
  const SphereQuadrature& q = quadrature_for(w);
  const double s = std::pow(r, -static_cast<double>(p.degree()));
  Rule1D g = gauss_legendre(24, 0.125, 2.0);
  double l2 = 0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double rho = g.x[i];
    l2 += g.w[i] * std::pow(rho, n) * q.integrate([&](const Vec3& d) {
      Vec3 x = rho * d;
      double e = s * w.value(r * x) - p(x);
      return e * e;
    });
  }
  rep.l2 = std::sqrt(std::max(l2, 0.0));
  if (rep.l2 > 0)
    rep.constant = rep.linf / std::pow(rep.l2, rep.sigma);
  else
    rep.constant = rep.linf > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return rep;
}

Stratification stratify_contact(const GridSolution& sol, const ProblemSpec& spec, const std::vector<double>& candidates,
                                 const FrequencyParams& params, int stride, double r_max) {
  require(stride >= 1 && r_max > 0, "stratify_contact: invalid arguments");
  require(sol.n == spec.n, "stratify_contact: solution and problem disagree on n");
  const int n = sol.n;
  Stratification out;
  ContactSet cs = contact_set(sol, 0.0);
  auto shared = std::make_shared<const GridSolution>(sol);
  const double eup = std::exp(kLogStep);

  for (std::size_t c = 0; c < cs.contact.size(); c += stride) {
    const Vec3 x0 = cs.contact[c];
    FieldSource f;
    f.n = n;
    f.grid_h = sol.h;
    f.reach = 1.0;
    if (spec.obstacle_polynomial) {
      const Polynomial phi = *spec.obstacle_polynomial;
      const Polynomial q = phi.taylor(x0, spec.k);
      const Polynomial qt = harmonic_extension(q, n);
      const Polynomial hp = (phi - q).laplacian(n) * -1.0;
      f.value = [shared, phi, q, qt, n](const Vec3& x) {
        Vec3 y = x;
        y[n] = 0.0;
        return shared->value(x) - phi(y) + q(y) - qt(x);
      };
      f.rhs = [hp, n](const Vec3& x) {
        Vec3 y = x;
        y[n] = 0.0;
        return hp(y);
      };
    } else {
      if (std::abs(spec.obstacle_at(x0)) > 1e-12)
        fail(ErrorCode::Precondition, "stratify_contact: nonzero obstacle without polynomial Taylor data");
      f.value = [shared](const Vec3& x) { return shared->value(x); };
    }

    out.nodes.push_back(x0);
    const double top = std::min(r_max, (1.0 - norm(x0) - sol.h) / eup);
    const double bottom = params.reliable_cells * sol.h;
    std::optional<double> plateau;
    if (top > bottom) {
      std::vector<double> radii = radii_ladder(top, bottom);
      try {
        FrequencyProfile prof = truncated_frequency(f, x0, params, radii);
        plateau = frequency_plateau(prof);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Resolution && e.code() != ErrorCode::Precondition) throw;
      }
    }
    if (!plateau) {
      out.plateau.push_back(std::nan(""));
      out.label.push_back("unresolved");
      continue;
    }
    out.plateau.push_back(*plateau);
    auto lab = frequency_label(*plateau, candidates, params.label_tolerance);
    out.label.push_back(lab ? format_label(*lab) : "unlabeled");
  }

  if (n == 2) {
    for (double mu : candidates) {
      const std::string name = format_label(mu);
      std::vector<Vec3> pts;
      for (std::size_t i = 0; i < out.nodes.size(); ++i)
        if (out.label[i] == name) pts.push_back(out.nodes[i]);
      if (pts.size() < 2) continue;
      StratumFit sf;
      sf.mu = mu;
      sf.count = static_cast<int>(pts.size());
      Eigen::Vector2d mean = Eigen::Vector2d::Zero();
      for (const Vec3& x : pts) mean += Eigen::Vector2d(x[0], x[1]);
      mean /= static_cast<double>(pts.size());
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (const Vec3& x : pts) {
        Eigen::Vector2d d = Eigen::Vector2d(x[0], x[1]) - mean;
        cov += d * d.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
      Eigen::Vector2d dir = es.eigenvectors().col(1);
      sf.point = {mean[0], mean[1], 0.0};
      sf.direction = {dir[0], dir[1], 0.0};
      sf.rms_residual = std::sqrt(std::max(es.eigenvalues()[0], 0.0) / pts.size());
      out.line_fits.push_back(sf);
    }
  }
  return out;
}

}  // namespace thin_epi

#include "thin_epi/weiss.hpp"

#include <cmath>

#include "thin_epi/quadrature.hpp"

namespace thin_epi {

BallFunction BallFunction::homogeneous(int n, double degree, SphereFn trace) {
  return sum(n, {HomogeneousTerm{degree, std::move(trace)}});
}

BallFunction BallFunction::sum(int n, std::vector<HomogeneousTerm> terms) {
  require(n == 1 || n == 2, "BallFunction: unsupported dimension");
  for (const auto& t : terms) require(t.degree > 0.0, "BallFunction: homogeneity degree must be positive");
  BallFunction b;
  b.n_ = n;
  b.terms_ = std::move(terms);
  return b;
}

BallFunction BallFunction::callable(int n, Field f, GradField grad, double fd_step) {
  require(n == 1 || n == 2, "BallFunction: unsupported dimension");
  require(static_cast<bool>(f), "BallFunction: empty callable");
  BallFunction b;
  b.n_ = n;
  b.f_ = std::move(f);
  b.g_ = std::move(grad);
  b.fd_step_ = fd_step;
  return b;
}

double BallFunction::value(const Vec3& x) const {
  if (f_) return f_(x);
  double r = norm(x);
  if (r == 0.0) return 0.0;
  Vec3 w = (1.0 / r) * x;
  double s = 0.0;
  for (const auto& t : terms_) s += std::pow(r, t.degree) * t.trace->value(w);
  return s;
}

Vec3 BallFunction::gradient(const Vec3& x) const {
  if (f_) {
    if (g_) return g_(x);
    double h = fd_step_ > 0.0 ? fd_step_ : 1e-6 * std::max(norm(x), 1e-3);
    Vec3 g{0, 0, 0};
    for (int i = 0; i <= n_; ++i) {
      Vec3 a = x, b = x;
      a[i] += h;
      b[i] -= h;
      g[i] = (f_(a) - f_(b)) / (2.0 * h);
    }
    return g;
  }
  double r = norm(x);
  if (r == 0.0) return {0, 0, 0};
  Vec3 w = (1.0 / r) * x;
  Vec3 g{0, 0, 0};
  for (const auto& t : terms_) {
    double rp = std::pow(r, t.degree - 1.0);
    g = g + rp * (t.degree * t.trace->value(w) * w + t.trace->gradient(w));
  }
  return g;
}

std::optional<HomogeneousTerm> BallFunction::homogeneity_tag() const {
  if (f_ || terms_.size() != 1) return std::nullopt;
  return terms_.front();
}

BallFunction BallFunction::scaled(double c) const {
  BallFunction b = *this;
  if (f_) {
    Field f = f_;
    b.f_ = [f, c](const Vec3& x) { return c * f(x); };
    if (g_) {
      GradField g = g_;
      b.g_ = [g, c](const Vec3& x) { return c * g(x); };
    }
    return b;
  }
  for (auto& t : b.terms_) t.trace = combine({{c, t.trace}});
  return b;
}

BallFunction homogeneous_extension(const SphericalTrace& c, double degree) {
  require(degree > 0.0, "homogeneous_extension: degree must be positive");
  return BallFunction::homogeneous(c.grid->n, degree, c.function());
}

BallQuadrature ball_quadrature(const SphereQuadrature& sphere, int radial_points) {
  BallQuadrature q;
  q.n = sphere.n;
  Rule1D r = gauss_legendre(radial_points, 0.0, 1.0);
  q.r = r.x;
  q.wr = r.w;
  q.sphere = &sphere;
  return q;
}

double BallQuadrature::integrate(const std::function<double(const Vec3&)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    double rn = std::pow(r[i], n), acc = 0.0;
    for (std::size_t k = 0; k < sphere->points.size(); ++k) acc += sphere->weights[k] * f(r[i] * sphere->points[k]);
    s += wr[i] * rn * acc;
  }
  return s;
}

namespace {

const SphereQuadrature& sphere_of(const WeissOptions& o, int n) {
  if (o.sphere) {
    require(o.sphere->n == n, "weiss: quadrature dimension mismatch");
    return *o.sphere;
  }
  return default_quadrature(n);
}

// Dirichlet energy and boundary mass of (sums of) homogeneous terms with
// closed radial integrals; cross = true pairs the terms of v against w.
void homogeneous_parts(const BallFunction& v, const BallFunction& w, const SphereQuadrature& sq, double& dirichlet,
                       double& boundary) {
  const auto& tv = v.terms();
  const auto& tw = w.terms();
  const int n = v.n();
  dirichlet = 0.0;
  boundary = 0.0;
  std::vector<double> cv(tv.size()), cw(tw.size());
  std::vector<Vec3> gv(tv.size()), gw(tw.size());
  for (std::size_t k = 0; k < sq.points.size(); ++k) {
    const Vec3& p = sq.points[k];
    double sv = 0.0, sw = 0.0;
    for (std::size_t a = 0; a < tv.size(); ++a) {
      cv[a] = tv[a].trace->value(p);
      gv[a] = tv[a].trace->gradient(p);
      sv += cv[a];
    }
    for (std::size_t b = 0; b < tw.size(); ++b) {
      cw[b] = tw[b].trace->value(p);
      gw[b] = tw[b].trace->gradient(p);
      sw += cw[b];
    }
    double d = 0.0;
    for (std::size_t a = 0; a < tv.size(); ++a)
      for (std::size_t b = 0; b < tw.size(); ++b) {
        double da = tv[a].degree, db = tw[b].degree;
        d += (da * db * cv[a] * cw[b] + dot(gv[a], gw[b])) / (n + da + db - 1.0);
      }
    dirichlet += sq.weights[k] * d;
    boundary += sq.weights[k] * sv * sw;
  }
}

double polar_dirichlet(const BallFunction& v, const BallFunction& w, const SphereQuadrature& sq, int radial) {
  BallQuadrature bq = ball_quadrature(sq, radial);
  return bq.integrate([&](const Vec3& x) { return dot(v.gradient(x), w.gradient(x)); });
}

double boundary_mass(const BallFunction& v, const BallFunction& w, const SphereQuadrature& sq) {
  return sq.integrate([&](const Vec3& p) { return v.value(p) * w.value(p); });
}

}  // namespace

EnergyReport weiss_quadrature(const BallFunction& v, double mu, const WeissOptions& opts) {
  const SphereQuadrature& sq = sphere_of(opts, v.n());
  EnergyReport rep;
  rep.mu = mu;
  double d = 0.0, b = 0.0;
  if (v.is_homogeneous_sum()) {
    homogeneous_parts(v, v, sq, d, b);
  } else {
    d = polar_dirichlet(v, v, sq, opts.radial_points);
    b = boundary_mass(v, v, sq);
    double coarse = polar_dirichlet(v, v, sq, std::max(8, opts.radial_points / 2));
    double scale = std::abs(d) + std::abs(mu) * std::abs(b);
    rep.quadrature_error_estimate = scale > 0.0 ? std::abs(d - coarse) / scale : 0.0;
    if (rep.quadrature_error_estimate > opts.max_relative_error)
      fail(ErrorCode::Resolution, "weiss_quadrature: estimated radial quadrature error " +
                                      std::to_string(rep.quadrature_error_estimate) + " above threshold");
  }
  rep.w_quad = d - mu * b;
  return rep;
}

double bilinear_R(const BallFunction& v, const BallFunction& w, double mu, const WeissOptions& opts) {
  require(v.n() == w.n(), "bilinear_R: dimension mismatch");
  const SphereQuadrature& sq = sphere_of(opts, v.n());
  double d = 0.0, b = 0.0;
  if (v.is_homogeneous_sum() && w.is_homogeneous_sum()) {
    homogeneous_parts(v, w, sq, d, b);
  } else {
    d = polar_dirichlet(v, w, sq, opts.radial_points);
    b = boundary_mass(v, w, sq);
  }
  return d - mu * b;
}

EnergyReport weiss_tilde(const BallFunction& v, const BallFunction::Field& h, double mu, const WeissOptions& opts) {
  EnergyReport rep = weiss_quadrature(v, mu, opts);
  if (h) {
    const SphereQuadrature& sq = sphere_of(opts, v.n());
    BallQuadrature bq = ball_quadrature(sq, opts.radial_points);
    rep.w_tilde = rep.w_quad + bq.integrate([&](const Vec3& x) { return v.value(x) * h(x); });
  } else {
    rep.w_tilde = rep.w_quad;
  }
  return rep;
}

double weiss_spectral(const Eigen::VectorXd& c, const EigenBasis& basis, double mu) {
  require(c.size() <= basis.count(), "weiss_spectral: more coefficients than basis modes");
  const int n = basis.grid->n;
  double lm = lambda_of(mu, n), s = 0.0;
  for (int j = 0; j < c.size(); ++j) s += (basis.eigenvalues[j] - lm) * c[j] * c[j];
  return s / (n + 2.0 * mu - 1.0);
}

double kappa_of(double alpha, double mu, int n) { return (alpha - mu) / (n + alpha + mu - 1.0); }

RaisedEnergy weiss_raised(const Eigen::VectorXd& c, const EigenBasis& basis, double mu, double alpha) {
  require(c.size() <= basis.count(), "weiss_raised: more coefficients than basis modes");
  const int n = basis.grid->n;
  RaisedEnergy r{0.0, 0.0, kappa_of(alpha, mu, n)};
  double la = lambda_of(alpha, n), res = 0.0;
  for (int j = 0; j < c.size(); ++j) {
    double lj = basis.eigenvalues[j], c2 = c[j] * c[j];
    r.value += c2 * ((alpha * alpha + lj) / (n + 2.0 * alpha - 1.0) - mu);
    res += (la - lj) * c2;
  }
  r.residual = r.kappa / (n + 2.0 * alpha - 1.0) * res;
  return r;
}

double weiss_homogeneous_nodes(const SphereGrid& grid, const Eigen::VectorXd& values, double mu, double degree) {
  double e = grid.dirichlet_energy(values), m = grid.inner(values, values);
  return (degree * degree * m + e) / (grid.n + 2.0 * degree - 1.0) - mu * m;
}

namespace {

SphereFn span_function(const Eigen::VectorXd& phi, const EigenBasis& basis) {
  std::vector<std::pair<double, SphereFn>> terms;
  for (int j = 0; j < phi.size(); ++j)
    if (phi[j] != 0.0) terms.emplace_back(phi[j], basis.mode(j));
  return combine(std::move(terms));
}

}  // namespace

BetaPairing beta_pairing(const Eigen::VectorXd& phi, const EigenBasis& half_basis, const SphereFunction& psi, double mu,
                         double alpha, const SphereQuadrature* sphere, double fd_step) {
  require(half_basis.is_exact(), "beta_pairing: phi must be expanded in an exact half-sphere basis");
  require(phi.size() <= half_basis.count(), "beta_pairing: more coefficients than basis modes");
  const int n = half_basis.grid->n;
  const SphereQuadrature& sq = sphere ? *sphere : default_quadrature(n);
  BetaPairing b{};
  double lm = lambda_of(mu, n);
  for (int j = 0; j < phi.size(); ++j) {
    if (phi[j] == 0.0) continue;
    b.interior += (half_basis.eigenvalues[j] - lm) * phi[j] * sq.inner(*half_basis.mode(j), psi);
  }
  SphereFn f = span_function(phi, half_basis);
  b.boundary = -2.0 * sq.integrate_equator([&](const Vec3& w) { return f->equator_normal_derivative(w, n, fd_step) * psi.value(w); });
  b.beta = b.interior + b.boundary;
  b.R = b.beta / (n + alpha + mu - 1.0);
  return b;
}

double spectral_cross(double a, const Eigen::VectorXd& phi, const EigenBasis& half_basis, double b,
                      const SphereFunction& psi, double mu, const SphereQuadrature* sphere, double fd_step) {
  require(half_basis.is_exact(), "spectral_cross: phi must be expanded in an exact half-sphere basis");
  const int n = half_basis.grid->n;
  const SphereQuadrature& sq = sphere ? *sphere : default_quadrature(n);
  double mass = 0.0, lam = 0.0;
  for (int j = 0; j < phi.size(); ++j) {
    if (phi[j] == 0.0) continue;
    double ip = sq.inner(*half_basis.mode(j), psi);
    mass += phi[j] * ip;
    lam += half_basis.eigenvalues[j] * phi[j] * ip;
  }
  SphereFn f = span_function(phi, half_basis);
  double eq = -2.0 * sq.integrate_equator([&](const Vec3& w) { return f->equator_normal_derivative(w, n, fd_step) * psi.value(w); });
  return (a * b * mass + lam + eq) / (n + a + b - 1.0) - mu * mass;
}

}  // namespace thin_epi

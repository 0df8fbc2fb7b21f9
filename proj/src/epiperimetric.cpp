#include "thin_epi/epiperimetric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace thin_epi {

EpiContext choose_delta(const BlowupProfile& p, GridPtr grid, const EpiConfig& cfg) {
  require(grid != nullptr, "choose_delta: missing grid");
  require(grid->n == p.n, "choose_delta: grid dimension differs from the profile");
  require(grid->has_operator(), "choose_delta: grid carries no Laplace-Beltrami operator");
  require(!cfg.delta_ladder.empty(), "choose_delta: empty delta ladder");
  for (std::size_t i = 0; i < cfg.delta_ladder.size(); ++i) {
    require(cfg.delta_ladder[i] > 0.0, "choose_delta: delta must be positive");
    if (i > 0) require(cfg.delta_ladder[i] < cfg.delta_ladder[i - 1], "choose_delta: ladder must decrease");
  }

  EpiContext ctx;
  ctx.p = p;
  ctx.m = p.m;
  ctx.n = p.n;
  ctx.ell = mode_count_ell(p.n, p.m);
  ctx.grid = grid;
  ctx.rule_threshold = lambda_of(2.0 * p.m + 2.0, p.n) - 1.0;
  Polynomial H = p.odd_harmonic();
  ctx.half = half_sphere_basis(p.n, 2 * p.m + 1 + std::max(1, cfg.extra_degrees), grid, &H);
  ctx.quad = std::make_shared<const SphereQuadrature>(cell_quadrature(*grid));
  ctx.p_values = sample(*p.trace(), *grid);

  std::ostringstream worst;
  for (double delta : cfg.delta_ladder) {
    EquatorMask mask = zero_set(p, delta, *grid);
    bool full = std::all_of(mask.begin(), mask.end(), [](char c) { return c != 0; });
    BasisPtr b = (full && cfg.basis_mode == BasisMode::Auto)
                     ? ctx.half
                     : eigenbasis(grid, mask, ctx.ell + std::max(1, cfg.extra_modes), cfg.eigen);
    int bad = -1;
    for (int j = ctx.ell; j < b->count() && bad < 0; ++j)
      if (b->eigenvalues[j] < ctx.rule_threshold) bad = j;
    std::ostringstream line;
    line << "delta=" << delta << " masked=" << std::count(mask.begin(), mask.end(), 1) << "/" << mask.size()
         << (b->is_exact() ? " exact" : " discrete") << " lambda_{ell+1}=" << b->eigenvalues[ctx.ell];
    if (bad >= 0) {
      line << " violates " << ctx.rule_threshold << " at j=" << bad + 1;
      worst.str("");
      worst << "lambda_" << bad + 1 << "=" << b->eigenvalues[bad] << " < " << ctx.rule_threshold << " at delta=" << delta;
    }
    ctx.log.push_back(line.str());
    if (bad < 0) {
      ctx.delta = delta;
      ctx.mask = std::move(mask);
      ctx.delta_basis = b;
      return ctx;
    }
  }
  fail(ErrorCode::Resolution, "choose_delta: no delta in the ladder satisfies the eigenvalue rule; " + worst.str());
}

namespace {

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

void check_trace_structure(const SphericalTrace& c, const EpiContext& ctx, double& zero_set_residual) {
  require(c.grid != nullptr && c.grid->size() == ctx.grid->size(), "decompose_trace: trace lives on another grid");
  const SphereGrid& g = *ctx.grid;
  const Eigen::VectorXd& v = c.values;
  double scale = std::max(1.0, max_abs(v));
  for (int i = 0; i < g.size(); ++i)
    if (std::abs(v[i] - v[g.reflection[i]]) > 1e-10 * scale)
      fail(ErrorCode::Precondition, "decompose_trace: trace is not even in x_{n+1}");
  zero_set_residual = 0.0;
  for (std::size_t k = 0; k < g.equator.size(); ++k) {
    double x = v[g.equator[k]];
    if (x < -1e-12 * scale) fail(ErrorCode::Precondition, "decompose_trace: trace is negative on the thin set");
    if (ctx.mask[k]) zero_set_residual = std::max(zero_set_residual, std::abs(x));
  }
  if (zero_set_residual > 1e-12 * scale)
    fail(ErrorCode::Precondition, "decompose_trace: trace does not vanish on Z_delta (max " +
                                      std::to_string(zero_set_residual) + ")");
}

bool coefficient_path(const SphericalTrace& c, const EpiContext& ctx) {
  return ctx.exact() && c.has_coefficients() && c.basis == ctx.delta_basis;
}

SphereFn span(const Eigen::VectorXd& coef, const EigenBasis& b) {
  std::vector<std::pair<double, SphereFn>> terms;
  for (int j = 0; j < coef.size(); ++j)
    if (coef[j] != 0.0) terms.emplace_back(coef[j], b.mode(j));
  return combine(std::move(terms));
}

SphereFn residual_function(const Decomposition& dec, const EpiContext& ctx) {
  if (dec.exact_residual) return span(dec.phi_coefficients, *ctx.delta_basis);
  return mesh_function(ctx.grid, dec.phi);
}

// W_mu(r^mu P + r^a phi) split into the P part, the phi part and the mixed
// term, each evaluated from the spectral closed forms.
struct SplitEnergy {
  double wP = 0;
  double wphi_mu = 0;
  double wphi_alpha = 0;
  double beta = 0;
};

SplitEnergy split_energy(const Decomposition& dec, const EpiContext& ctx, double alpha, const EpiConfig& cfg) {
  const double mu = ctx.mu();
  SplitEnergy s;
  s.wP = weiss_spectral(dec.nu, *ctx.half, mu);
  if (dec.exact_residual) {
    // Same orthonormal basis and disjoint supports: no mixed term.
    s.wphi_mu = weiss_spectral(dec.phi_coefficients, *ctx.delta_basis, mu);
    s.wphi_alpha = weiss_raised(dec.phi_coefficients, *ctx.delta_basis, mu, alpha).value;
  } else {
    s.wphi_mu = weiss_homogeneous_nodes(*ctx.grid, dec.phi, mu, mu);
    s.wphi_alpha = weiss_homogeneous_nodes(*ctx.grid, dec.phi, mu, alpha);
    SphereFn f = mesh_function(ctx.grid, dec.phi);
    s.beta = beta_pairing(dec.nu, *ctx.half, *f, mu, alpha, ctx.quad.get(), cfg.fd_step).beta;
  }
  return s;
}

Admissibility check_competitor(const BallFunction& zeta, const SphericalTrace& c, const EpiContext& ctx) {
  const SphereGrid& g = *ctx.grid;
  double scale = std::max(1.0, max_abs(c.values));
  Admissibility a;
  double match = 0.0, parity = 0.0, low = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    match = std::max(match, std::abs(zeta.value(g.nodes[i]) - c.values[i]));
    Vec3 x = 0.7 * g.nodes[i];
    parity = std::max(parity, std::abs(zeta.value(x) - zeta.value(reflect(x, ctx.n))));
  }
  for (int k : g.equator)
    for (double r : {1.0, 0.5}) low = std::min(low, zeta.value(r * g.nodes[k]));
  a.matches_trace = match <= 1e-8 * scale;
  a.even = parity <= 1e-10 * scale;
  a.nonnegative_on_thin_set = low >= -1e-12 * scale;
  return a;
}

double trace_distance_to_p(const SphericalTrace& c, const EpiContext& ctx) {
  if (coefficient_path(c, ctx)) {
    Eigen::VectorXd d = c.coefficients;
    double pn = trace_norm(ctx.n, ctx.p.odd_harmonic());
    d[ctx.ell - 1] -= pn;
    return d.norm();
  }
  Eigen::VectorXd d = c.values - ctx.p_values;
  return std::sqrt(std::max(0.0, ctx.grid->inner(d, d)));
}

void eps_gate(EpiReport& rep, const EpiConfig& cfg) {
  rep.eps_gate = rep.distance_to_p <= cfg.eps * (1.0 + 1e-12);
  if (!rep.eps_gate)
    fail(ErrorCode::Hypothesis, "trace too far from p: ||c - p|| = " + std::to_string(rep.distance_to_p) +
                                    " > eps = " + std::to_string(cfg.eps));
}

}  // namespace

Decomposition decompose_trace(const SphericalTrace& c, const EpiContext& ctx, const EpiConfig& cfg) {
  Decomposition dec;
  dec.delta = ctx.delta;
  check_trace_structure(c, ctx, dec.zero_set_residual);
  const SphereGrid& g = *ctx.grid;
  const EigenBasis& D = *ctx.delta_basis;
  const int ell = ctx.ell;
  dec.distance_to_p = trace_distance_to_p(c, ctx);

  if (coefficient_path(c, ctx)) {
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(D.count());
    coef.head(c.coefficients.size()) = c.coefficients;
    dec.nu = coef.head(ell);
    dec.phi_coefficients = coef;
    dec.phi_coefficients.head(ell).setZero();
    dec.phi = D.modes * dec.phi_coefficients;
    dec.exact_residual = true;
  } else {
    Eigen::MatrixXd A(ell, ell);
    Eigen::VectorXd rhs(ell);
    for (int i = 0; i < ell; ++i) {
      for (int j = 0; j < ell; ++j) A(i, j) = g.inner(D.modes.col(i), ctx.half->modes.col(j));
      rhs[i] = g.inner(c.values, D.modes.col(i));
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    dec.condition = sv[ell - 1] > 0.0 ? sv[0] / sv[ell - 1] : std::numeric_limits<double>::infinity();
    if (!(dec.condition <= cfg.condition_threshold))
      fail(ErrorCode::IllConditioned, "decompose_trace: moment matrix condition " + std::to_string(dec.condition) +
                                          " above " + std::to_string(cfg.condition_threshold));
    dec.nu = A.colPivHouseholderQr().solve(rhs);
    dec.phi = c.values - ctx.half->modes.leftCols(ell) * dec.nu;
    for (std::size_t k = 0; k < g.equator.size(); ++k)
      if (ctx.mask[k]) dec.phi[g.equator[k]] = 0.0;
    dec.phi_coefficients = D.project(dec.phi);
  }
  Eigen::VectorXd recon = ctx.half->modes.leftCols(ell) * dec.nu + dec.phi;
  dec.reconstruction_error = max_abs(recon - c.values);
  for (int i = 0; i < ell; ++i)
    dec.moment_residual = std::max(dec.moment_residual, std::abs(g.inner(dec.phi, D.modes.col(i))));
  if (dec.exact_residual) dec.moment_residual = max_abs(dec.phi_coefficients.head(ell));
  return dec;
}

BallFunction build_competitor_positive(const Decomposition& dec, const EpiContext& ctx) {
  const double mu = ctx.mu();
  return BallFunction::sum(ctx.n, {{mu, span(dec.nu, *ctx.half)}, {mu + 0.5, residual_function(dec, ctx)}});
}

EpiReport verify_epi(const SphericalTrace& c, const EpiContext& ctx, const EpiConfig& cfg) {
  Decomposition dec = decompose_trace(c, ctx, cfg);
  EpiReport rep;
  rep.mu = ctx.mu();
  rep.delta = ctx.delta;
  rep.condition = dec.condition;
  rep.distance_to_p = dec.distance_to_p;
  eps_gate(rep, cfg);

  const int n = ctx.n;
  const double mu = rep.mu, alpha = mu + 0.5;
  rep.alpha = alpha;
  rep.kappa = kappa_of(alpha, mu, n);
  SplitEnergy s = split_energy(dec, ctx, alpha, cfg);
  rep.w_z = s.wP + s.wphi_mu + 2.0 * s.beta / (n + 2.0 * mu - 1.0);
  rep.w_zeta = s.wP + s.wphi_alpha + 2.0 * s.beta / (n + alpha + mu - 1.0);
  rep.cancellation = 2.0 * s.beta * (1.0 / (n + alpha + mu - 1.0) - (1.0 - rep.kappa) / (n + 2.0 * mu - 1.0));
  rep.bound = (1.0 - rep.kappa) * rep.w_z;
  rep.slack = rep.bound - rep.w_zeta;
  rep.violation = rep.slack < -1e-8;

  BallFunction zeta = build_competitor_positive(dec, ctx);
  rep.zeta = check_competitor(zeta, c, ctx);
  if (cfg.quadrature_path) {
    WeissOptions o;
    o.sphere = ctx.quad.get();
    BallFunction z = BallFunction::sum(n, {{mu, span(dec.nu, *ctx.half)}, {mu, residual_function(dec, ctx)}});
    rep.w_z_quad = weiss_quadrature(z, mu, o).w_quad;
    rep.w_zeta_quad = weiss_quadrature(zeta, mu, o).w_quad;
    rep.discrepancy = std::max(std::abs(rep.w_z_quad - rep.w_z), std::abs(rep.w_zeta_quad - rep.w_zeta));
  }
  return rep;
}

double solve_alpha_negative(double w, int n, int m, double tol) {
  require(w >= 0.0, "solve_alpha_negative: w must be nonnegative");
  const double mu = 2.0 * m + 1.0;
  if (w == 0.0) return mu;
  auto f = [&](double a) { return (mu - a) / (n + a + mu - 1.0) - w; };
  double lo = 2.0 * m, hi = mu;
  if (f(lo) <= 0.0)
    fail(ErrorCode::Hypothesis, "solve_alpha_negative: |W(z)| = " + std::to_string(w) + " puts alpha outside (2m, 2m+1)");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

NegativeResult build_competitor_negative(const SphericalTrace& c, const EpiContext& ctx, const EpiConfig& cfg) {
  Decomposition dec = decompose_trace(c, ctx, cfg);
  const int n = ctx.n, ell = ctx.ell;
  const double mu = ctx.mu();
  NegativeResult out;
  EpiReport& rep = out.report;
  rep.negative_case = true;
  rep.mu = mu;
  rep.delta = ctx.delta;
  rep.condition = dec.condition;
  rep.distance_to_p = dec.distance_to_p;
  eps_gate(rep, cfg);

  SplitEnergy s = split_energy(dec, ctx, mu, cfg);
  rep.w_z = s.wP + s.wphi_mu + 2.0 * s.beta / (n + 2.0 * mu - 1.0);
  rep.eta_gate = std::abs(rep.w_z) <= cfg.eta;
  if (!rep.eta_gate)
    fail(ErrorCode::Hypothesis, "build_competitor_negative: |W(z)| = " + std::to_string(std::abs(rep.w_z)) +
                                    " exceeds eta = " + std::to_string(cfg.eta));

  SphereFn phi_res = residual_function(dec, ctx);
  Eigen::VectorXd nuL = dec.nu;
  nuL[ell - 1] = 0.0;
  Eigen::VectorXd nuH = Eigen::VectorXd::Zero(ell);
  nuH[ell - 1] = dec.nu[ell - 1];
  SphereFn h = span(nuH, *ctx.half);
  SphereFn phi = combine({{1.0, span(nuL, *ctx.half)}, {1.0, phi_res}});
  Eigen::VectorXd c_minus_h = c.values - ctx.half->modes.col(ell - 1) * nuH[ell - 1];
  out.phi_norm2 = ctx.grid->inner(c_minus_h, c_minus_h);

  if (rep.w_z >= 0.0) {
    rep.alpha = mu;
    rep.kappa = 0.0;
    rep.w_zeta = rep.w_z;
    out.zeta = BallFunction::sum(n, {{mu, span(dec.nu, *ctx.half)}, {mu, phi_res}});
  } else {
    rep.kappa = -rep.w_z;
    rep.alpha = solve_alpha_negative(rep.kappa, n, ctx.m);
    const double a = rep.alpha;
    if (!(a > 2.0 * ctx.m && a < mu)) fail(ErrorCode::Hypothesis, "build_competitor_negative: alpha outside (2m, 2m+1)");
    double wh = weiss_spectral(nuH, *ctx.half, mu);
    if (dec.exact_residual) {
      Eigen::VectorXd coef = dec.phi_coefficients;
      coef.head(ell) += nuL;
      out.phi_norm2 = coef.squaredNorm();
      rep.w_zeta = wh + weiss_raised(coef, *ctx.delta_basis, mu, a).value;
    } else {
      const SphereQuadrature* q = ctx.quad.get();
      double wl = weiss_raised(nuL, *ctx.half, mu, a).value;
      double wr = weiss_homogeneous_nodes(*ctx.grid, dec.phi, mu, a);
      double x1 = spectral_cross(a, nuL, *ctx.half, a, *phi_res, mu, q, cfg.fd_step);
      double x2 = spectral_cross(mu, nuH, *ctx.half, a, *phi_res, mu, q, cfg.fd_step);
      rep.w_zeta = wh + wl + wr + 2.0 * x1 + 2.0 * x2;
    }
    out.zeta = BallFunction::sum(n, {{mu, h}, {a, phi}});
  }
  out.norm_bound = (n + 2.0 * mu - 1.0) / std::pow(n + mu + rep.alpha - 1.0, 2);
  rep.bound = (1.0 + std::abs(rep.w_z)) * rep.w_z;
  rep.slack = rep.bound - rep.w_zeta;
  rep.violation = rep.slack < -1e-8;
  rep.zeta = check_competitor(out.zeta, c, ctx);
  if (cfg.quadrature_path) {
    WeissOptions o;
    o.sphere = ctx.quad.get();
    BallFunction z = BallFunction::sum(n, {{mu, span(dec.nu, *ctx.half)}, {mu, phi_res}});
    rep.w_z_quad = weiss_quadrature(z, mu, o).w_quad;
    rep.w_zeta_quad = weiss_quadrature(out.zeta, mu, o).w_quad;
    rep.discrepancy = std::max(std::abs(rep.w_z_quad - rep.w_z), std::abs(rep.w_zeta_quad - rep.w_zeta));
  }
  return out;
}

namespace {

// Perturbation on modes beyond ell with variance decaying like 1/(1+lambda),
// scaled to L2 norm `amp`. On a discrete basis the part on the unmasked
// equator may be negative; it is lifted by a multiple of the (positive)
// ground mode and rescaled, which keeps it admissible.
Eigen::VectorXd higher_perturbation(const EpiContext& ctx, double amp, std::mt19937_64& rng,
                                    Eigen::VectorXd* coefficients) {
  const EigenBasis& D = *ctx.delta_basis;
  const SphereGrid& g = *ctx.grid;
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(D.count());
  for (int j = ctx.ell; j < D.count(); ++j) a[j] = N(rng) / std::sqrt(1.0 + D.eigenvalues[j]);
  if (a.norm() == 0.0 || amp == 0.0) {
    if (coefficients) *coefficients = Eigen::VectorXd::Zero(D.count());
    return Eigen::VectorXd::Zero(g.size());
  }
  a *= amp / a.norm();
  Eigen::VectorXd v = D.modes * a;
  if (D.is_exact()) {
    if (coefficients) *coefficients = a;
    return v;
  }
  Eigen::VectorXd ground = D.modes.col(0);
  if (ground.sum() < 0.0) ground = -ground;
  double lift = 0.0;
  for (std::size_t k = 0; k < g.equator.size(); ++k) {
    if (ctx.mask[k]) continue;
    int i = g.equator[k];
    if (v[i] >= 0.0) continue;
    if (ground[i] <= 0.0) fail(ErrorCode::Precondition, "random trace: ground mode is not positive on the thin set");
    lift = std::max(lift, -v[i] / ground[i]);
  }
  v += lift * ground;
  double norm = std::sqrt(g.inner(v, v));
  if (norm > amp) v *= amp / norm;
  if (coefficients) coefficients->resize(0);
  return v;
}

SphericalTrace assemble(const EpiContext& ctx, const Eigen::VectorXd& values, const Eigen::VectorXd& coefficients) {
  if (coefficients.size() > 0 && ctx.exact()) return trace_from_coefficients(ctx.delta_basis, coefficients);
  SphericalTrace t;
  t.grid = ctx.grid;
  t.values = values;
  return t;
}

}  // namespace

SphericalTrace random_positive_trace(const EpiContext& ctx, const EpiConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double amp = cfg.eps * (0.05 + 0.95 * U(rng));
  Eigen::VectorXd coef;
  Eigen::VectorXd v = ctx.p_values + higher_perturbation(ctx, amp, rng, &coef);
  if (coef.size() > 0) coef[ctx.ell - 1] = trace_norm(ctx.n, ctx.p.odd_harmonic());
  return assemble(ctx, v, coef);
}

SphericalTrace random_negative_trace(const EpiContext& ctx, const EpiConfig& cfg, std::mt19937_64& rng) {
  const int ell = ctx.ell;
  if (ell < 2)
    fail(ErrorCode::Precondition,
         "random_negative_trace: no modes below p, so W(z) >= 0 for every admissible trace at m = 0");
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  const double pn = trace_norm(ctx.n, ctx.p.odd_harmonic());
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Eigen::VectorXd lower = Eigen::VectorXd::Zero(ell);
    for (int j = 0; j < ell - 1; ++j) lower[j] = N(rng);
    double sl = cfg.eps * (0.2 + 0.75 * U(rng));
    lower *= sl / lower.norm();
    double shift = 0.2 * sl * (2.0 * U(rng) - 1.0);
    double sh = 0.3 * sl * U(rng);
    Eigen::VectorXd coef;
    Eigen::VectorXd high = higher_perturbation(ctx, sh, rng, &coef);
    double total = std::sqrt(sl * sl + shift * shift + ctx.grid->inner(high, high));
    double f = total > cfg.eps ? 0.99 * cfg.eps / total : 1.0;
    lower *= f;
    shift *= f;
    high *= f;
    lower[ell - 1] = pn + shift;
    Eigen::VectorXd v = ctx.half->modes.leftCols(ell) * lower + high;
    SphericalTrace t;
    if (coef.size() > 0) {
      coef *= f;
      coef.head(ell) += lower;
      t = trace_from_coefficients(ctx.delta_basis, coef);
    } else {
      t = assemble(ctx, v, Eigen::VectorXd());
    }
    Decomposition dec = decompose_trace(t, ctx, cfg);
    SplitEnergy s = split_energy(dec, ctx, ctx.mu(), cfg);
    double w = s.wP + s.wphi_mu + 2.0 * s.beta / (ctx.n + 2.0 * ctx.mu() - 1.0);
    if (w < 0.0 && w > -cfg.eta && dec.distance_to_p <= cfg.eps) return t;
  }
  fail(ErrorCode::NotConverged, "random_negative_trace: no admissible trace with W(z) in (-eta, 0) found");
}

namespace {

OffDegreeReport offdegree(int n, const SphereFn& c, const BallFunction::Field& solution, double mu, double t,
                          const WeissOptions& opts) {
  const double a = mu + t;
  require(a > 0.0, "weiss_of_offdegree: mu + t must be positive");
  const SphereQuadrature& sq = opts.sphere ? *opts.sphere : default_quadrature(n);
  OffDegreeReport r;
  r.mu = mu;
  r.t = t;
  r.norm2 = sq.integrate([&](const Vec3& w) {
    double v = c->value(w);
    return v * v;
  });
  WeissOptions o = opts;
  o.sphere = &sq;
  const double factor = 1.0 + t / (n + 2.0 * mu - 1.0);
  r.shifted_rhs = t * r.norm2;

  r.shifted_exact = weiss_quadrature(BallFunction::homogeneous(n, a, c), mu, o).w_quad;
  r.base_exact = weiss_quadrature(BallFunction::homogeneous(n, mu, c), mu, o).w_quad;
  r.base_rhs_exact = factor * r.shifted_exact;

  auto radial = [c](double deg) {
    return [c, deg](const Vec3& x) {
      double rr = norm(x);
      return rr == 0.0 ? 0.0 : std::pow(rr, deg) * c->value((1.0 / rr) * x);
    };
  };
  BallFunction::Field fa = solution ? solution : BallFunction::Field(radial(a));
  r.shifted_quad = weiss_quadrature(BallFunction::callable(n, fa), mu, o).w_quad;
  r.base_quad = weiss_quadrature(BallFunction::callable(n, radial(mu)), mu, o).w_quad;
  r.base_rhs_quad = factor * r.shifted_quad;

  double s = std::max(r.norm2, 1e-300);
  r.discrepancy_exact =
      std::max(std::abs(r.shifted_exact - r.shifted_rhs), std::abs(r.base_exact - r.base_rhs_exact)) / s;
  r.discrepancy_quad = std::max(std::abs(r.shifted_quad - r.shifted_rhs), std::abs(r.base_quad - r.base_rhs_quad)) / s;
  return r;
}

}  // namespace

OffDegreeReport weiss_of_offdegree(int n, const SphereFn& c, double mu, double t, const WeissOptions& opts) {
  return offdegree(n, c, {}, mu, t, opts);
}

OffDegreeReport weiss_of_offdegree(const HalfspaceSolution2D& sol, double mu, const WeissOptions& opts) {
  return offdegree(1, sol.trace(), [sol](const Vec3& x) { return sol(x); }, mu, sol.mu - mu, opts);
}

std::vector<double> a1_members(double upper) {
  std::vector<double> out;
  for (int m = 0; 2.0 * m - 0.5 <= upper; ++m) {
    if (m >= 1) {
      out.push_back(2.0 * m - 0.5);
      if (2.0 * m <= upper) out.push_back(2.0 * m);
    }
    if (2.0 * m + 1.0 <= upper) out.push_back(2.0 * m + 1.0);
  }
  std::sort(out.begin(), out.end());
  return out;
}

GapReport gap_demo(int m, int n, const std::vector<double>& t_grid, double below, double above) {
  require(m >= 0, "gap_demo: m must be nonnegative");
  require(n == 1 || n == 2, "gap_demo: unsupported dimension");
  GapReport rep;
  rep.m = m;
  rep.n = n;
  const double mu = 2.0 * m + 1.0;
  rep.C = 1.0 / (n + 2.0 * mu - 1.0);
  rep.kappa = kappa_of(mu + 0.5, mu, n);
  const double C = rep.C;
  for (double t : t_grid) {
    require(t != 0.0 && std::abs(t) < 0.5, "gap_demo: t must lie in (-1/2, 1/2) without 0");
    GapRow row;
    row.t = t;
    if (t < 0.0) {
      // W(u) = t < 0 and the negative-energy inequality force lhs <= 1.
      row.branch = "negative";
      row.lhs = (1.0 - (1.0 + C * t) * t) * (1.0 + C * t);
      row.first_order = -t + C * t;
      row.contradiction = row.lhs > 1.0;
    } else {
      // W(u) = t > 0, minimality and the positive inequality force
      // (1 - kappa)(1 + Ct) >= 1.
      row.branch = "positive";
      row.lhs = (1.0 - rep.kappa) * (1.0 + C * t);
      row.first_order = -rep.kappa + (1.0 - rep.kappa) * C * t;
      row.contradiction = row.lhs < 1.0;
    }
    rep.all_contradict = rep.all_contradict && row.contradiction;
    rep.rows.push_back(row);
  }
  if (n == 1) {
    std::vector<double> a1 = a1_members(mu + 4.0);
    rep.a1_nearest_below = -1.0;
    rep.a1_nearest_above = -1.0;
    for (double x : a1) {
      if ((x > mu - below && x < mu) || (x > mu && x < mu + above)) rep.a1_in_window.push_back(x);
      if (x < mu) rep.a1_nearest_below = x;
      if (x > mu && rep.a1_nearest_above < 0.0) rep.a1_nearest_above = x;
    }
  }
  return rep;
}

}  // namespace thin_epi

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "thin_epi/catalog.hpp"
#include "thin_epi/weiss.hpp"

using namespace thin_epi;

namespace {

// Forces genuine ball quadrature (no closed radial integrals).
BallFunction as_callable(const BallFunction& v) {
  return BallFunction::callable(
      v.n(), [v](const Vec3& x) { return v.value(x); }, [v](const Vec3& x) { return v.gradient(x); });
}

// W_mu(r^alpha a |sin theta|/sqrt(pi)) for n = 1, by hand:
// Dirichlet part a^2 (alpha^2 + 1)/(2 alpha), boundary part mu a^2.
double first_mode_energy(double a, double alpha, double mu) { return a * a * ((alpha * alpha + 1.0) / (2.0 * alpha) - mu); }

}  // namespace

TEST_CASE("closed form for the first half-circle mode") {
  BasisPtr b = half_sphere_basis(1, 3);
  for (double alpha : {1.0, 1.5, 2.0})
    for (double mu : {1.0, 0.5}) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(b->count());
      c[0] = 0.7;
      const double expect = first_mode_energy(0.7, alpha, mu);
      CHECK(weiss_raised(c, *b, mu, alpha).value == doctest::Approx(expect).epsilon(1e-12));
      BallFunction v = BallFunction::homogeneous(1, alpha, b->mode(0)).scaled(0.7);
      CHECK(weiss_quadrature(v, mu).w_quad == doctest::Approx(expect).epsilon(1e-10));
      CHECK(weiss_quadrature(as_callable(v), mu).w_quad == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("spectral energy matches quadrature for random coefficients") {
  BasisPtr b = half_sphere_basis(1, 5);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd c(b->count());
    for (int j = 0; j < c.size(); ++j) c[j] = N(rng);
    std::vector<HomogeneousTerm> terms;
    for (int j = 0; j < c.size(); ++j) terms.push_back({1.0, combine({{c[j], b->mode(j)}})});
    BallFunction v = BallFunction::sum(1, terms);
    const double spec = weiss_spectral(c, *b, 1.0);
    const double quad = weiss_quadrature(as_callable(v), 1.0).w_quad;
    CHECK(std::abs(spec - quad) <= 1e-8 * std::max(std::abs(spec), c.squaredNorm()));
  }
}

TEST_CASE("homogeneous solutions have zero energy at their own degree") {
  for (double mu : {1.5, 2.0, 3.0}) {
    HalfspaceSolution2D s = halfspace_2d(mu);
    BallFunction v = BallFunction::callable(
        1, [s](const Vec3& x) { return s(x); }, [s](const Vec3& x) { return s.gradient(x); });
    CHECK(std::abs(weiss_quadrature(v, mu).w_quad) < 1e-8);
    // W_mu(u) = (a - mu) ||u||^2 on the sphere for an a-homogeneous solution.
    CHECK(weiss_quadrature(v, 1.0).w_quad == doctest::Approx((mu - 1.0) * kPi).epsilon(1e-8));
  }
}

TEST_CASE("bilinear form is symmetric and consistent with the energy") {
  BasisPtr b = half_sphere_basis(1, 3);
  BallFunction v = BallFunction::homogeneous(1, 1.0, b->mode(0));
  BallFunction w = BallFunction::homogeneous(1, 1.5, combine({{1.0, b->mode(1)}, {0.3, b->mode(2)}}));
  CHECK(bilinear_R(v, w, 1.0) == doctest::Approx(bilinear_R(w, v, 1.0)));
  BallFunction sum = BallFunction::sum(1, {v.terms()[0], w.terms()[0]});
  const double lhs = weiss_quadrature(sum, 1.0).w_quad;
  const double rhs = weiss_quadrature(v, 1.0).w_quad + weiss_quadrature(w, 1.0).w_quad + 2.0 * bilinear_R(v, w, 1.0);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("double-product identity with a trace that does not vanish on the equator") {
  BasisPtr b = half_sphere_basis(1, 4);
  Eigen::VectorXd phi(4);
  phi << 0.2, -0.5, 0.3, 0.1;
  SphereFn psi = angular_trace([](double t) { return std::cos(t) + 0.5 * std::cos(2.0 * t) + 0.2; },
                               [](double t) { return -std::sin(t) - std::sin(2.0 * t); });
  const double mu = 1.0, alpha = 1.5;
  BetaPairing beta = beta_pairing(phi, *b, *psi, mu, alpha);
  std::vector<std::pair<double, SphereFn>> terms;
  for (int j = 0; j < 4; ++j) terms.emplace_back(phi[j], b->mode(j));
  BallFunction v = BallFunction::homogeneous(1, mu, combine(terms));
  BallFunction w = BallFunction::homogeneous(1, alpha, psi);
  const double R = bilinear_R(as_callable(v), as_callable(w), mu);
  CHECK(std::abs((1.0 + alpha + mu - 1.0) * R - beta.beta) < 1e-6);
  CHECK(beta.boundary != 0.0);
  CHECK(spectral_cross(mu, phi, *b, alpha, *psi, mu) == doctest::Approx(R).epsilon(1e-6));
}

TEST_CASE("kappa and the raised residual") {
  CHECK(kappa_of(1.5, 1.0, 1) == doctest::Approx(0.5 / 2.5));
  BasisPtr b = half_sphere_basis(1, 3);
  Eigen::VectorXd c(3);
  c << 0.0, 0.4, -0.2;
  RaisedEnergy r = weiss_raised(c, *b, 1.0, 1.5);
  // W(r^alpha c) = (1 - kappa) W(r^mu c) + residual.
  const double base = weiss_spectral(c, *b, 1.0);
  CHECK(r.value == doctest::Approx((1.0 - r.kappa) * base + r.residual).epsilon(1e-12));
}

TEST_CASE("discrete node energy converges to the quadrature energy") {
  double prev = 1e300;
  for (int res : {16, 32, 64}) {
    GridPtr g = build_grid(2, res);
    BlowupProfile p = catalog_profile(0, 2);
    Eigen::VectorXd vals = sample(*p.trace(), *g);
    const double nodes = weiss_homogeneous_nodes(*g, vals, 1.0, 1.5);
    BallFunction v = BallFunction::homogeneous(2, 1.5, p.trace());
    const double exact = weiss_quadrature(v, 1.0).w_quad;
    const double err = std::abs(nodes - exact);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("weiss tilde adds the source pairing") {
  BasisPtr b = half_sphere_basis(1, 1);
  BallFunction v = BallFunction::homogeneous(1, 1.0, b->mode(0));
  auto rep = weiss_tilde(v, [](const Vec3&) { return 1.0; }, 1.0);
  REQUIRE(rep.w_tilde.has_value());
  // int_{B_1} r |sin theta|/sqrt(pi) = (1/3)(4/sqrt(pi)).
  CHECK(std::abs(*rep.w_tilde - rep.w_quad) == doctest::Approx(4.0 / (3.0 * std::sqrt(kPi))).epsilon(1e-8));
}

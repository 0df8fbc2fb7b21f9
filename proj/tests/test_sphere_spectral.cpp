#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>

#include "thin_epi/catalog.hpp"
#include "thin_epi/spectral.hpp"
#include "thin_epi/spectral_convergence.hpp"

using namespace thin_epi;

namespace {

double weight_sum(const SphereGrid& g) { return std::accumulate(g.weights.begin(), g.weights.end(), 0.0); }

// Number of harmonic polynomials of degree j in n+1 variables that are odd
// in the last one: dim H_j(R^{n+1}) minus the even ones, counted directly.
int odd_harmonic_count(int n, int j) {
  if (n == 1) return 1;
  // In R^3 the degree-j harmonics are spanned by Y_j^k, k = -j..j; the odd
  // ones in x_3 are those with j - |k| odd.
  int c = 0;
  for (int k = -j; k <= j; ++k)
    if ((j - std::abs(k)) % 2 == 1) ++c;
  return c;
}

}  // namespace

TEST_CASE("circle grid has uniform weights and the two equator nodes") {
  GridPtr g = build_grid(1, 360);
  CHECK(g->size() == 360);
  CHECK(weight_sum(*g) == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  REQUIRE(g->equator.size() == 2);
  for (int e : g->equator) {
    CHECK(g->nodes[e][1] == 0.0);
    CHECK(std::abs(std::abs(g->nodes[e][0]) - 1.0) < 1e-15);
  }
}

TEST_CASE("sphere grids integrate the area and reflect exactly") {
  for (GridPtr g : {build_grid(2, 64), build_grid(2, 128, GridKind::LatLong)}) {
    CHECK(std::abs(weight_sum(*g) - 4.0 * kPi) < 1e-10 * 4.0 * kPi);
    for (int i = 0; i < g->size(); ++i) {
      const int j = g->reflection[i];
      CHECK(g->reflection[j] == i);
      CHECK(g->nodes[j][2] == -g->nodes[i][2]);
      CHECK(g->weights[j] == doctest::Approx(g->weights[i]));
    }
  }
}

TEST_CASE("grid construction rejects bad parameters") {
  CHECK_THROWS_AS(build_grid(3, 64), Error);
  CHECK_THROWS_AS(build_grid(1, 8), Error);
}

TEST_CASE("half-circle Dirichlet spectrum is j^2") {
  GridPtr g = build_grid(1, 360);
  BasisPtr b = eigenbasis(g, full_mask(*g), 3);
  for (int j = 0; j < 3; ++j) CHECK(b->eigenvalues[j] == doctest::Approx((j + 1.0) * (j + 1.0)).epsilon(1e-3));
  for (int j = 0; j < 3; ++j)
    for (int e : g->equator) CHECK(b->modes(e, j) == 0.0);
}

TEST_CASE("unconstrained sphere has the constant ground state") {
  GridPtr g = build_grid(1, 180);
  BasisPtr b = eigenbasis(g, empty_mask(*g), 1);
  CHECK(std::abs(b->eigenvalues[0]) < 1e-10);
  Eigen::VectorXd v = b->modes.col(0);
  CHECK(v.maxCoeff() - v.minCoeff() < 1e-8 * v.cwiseAbs().maxCoeff());
}

TEST_CASE("eigenbasis modes are orthonormal and sorted") {
  for (GridPtr g : {build_grid(1, 240), build_grid(2, 32)}) {
    BlowupProfile p = catalog_profile(0, g->n);
    BasisPtr b = eigenbasis(g, zero_set(p, 0.5, *g), 6);
    for (int i = 0; i < b->count(); ++i) {
      if (i > 0) CHECK(b->eigenvalues[i] >= b->eigenvalues[i - 1] - 1e-12);
      for (int j = 0; j < b->count(); ++j) {
        double ip = g->inner(b->modes.col(i), b->modes.col(j));
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-8);
      }
    }
  }
}

TEST_CASE("exact half-sphere basis") {
  BasisPtr b = half_sphere_basis(1, 3);
  REQUIRE(b->count() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(b->eigenvalues[j] == doctest::Approx((j + 1.0) * (j + 1.0)));
    CHECK(b->degrees[j] == j + 1);
  }
  BasisPtr b1 = half_sphere_basis(1, 1);
  const double expected = 1.0 / std::sqrt(kPi);
  CHECK(std::abs(b1->mode(0)->value({0, 1, 0})) == doctest::Approx(expected));
  CHECK(b1->mode(0)->value({0, -1, 0}) == doctest::Approx(b1->mode(0)->value({0, 1, 0})));
  const double s = std::sin(0.3), c = std::cos(0.3);
  CHECK(std::abs(b1->mode(0)->value({c, s, 0})) == doctest::Approx(expected * s));

  BasisPtr b2 = half_sphere_basis(2, 1);
  REQUIRE(b2->count() == 1);
  Vec3 w1{0.6, 0.0, 0.8}, w2{0.0, 0.28, 0.96};
  CHECK(b2->mode(0)->value(w1) / 0.8 == doctest::Approx(b2->mode(0)->value(w2) / 0.96));
}

TEST_CASE("lambda and mode counts") {
  CHECK(lambda_of(1.0, 1) == 1.0);
  CHECK(lambda_of(0.0, 2) == 0.0);
  CHECK(lambda_of(1.5, 1) == doctest::Approx(2.25));
  for (int n : {1, 2})
    for (int m = 0; m < 4; ++m) {
      int expect = 0;
      for (int j = 1; j <= 2 * m + 1; ++j) expect += odd_harmonic_count(n, j);
      CHECK(mode_count_ell(n, m) == expect);
      for (int j = 1; j <= 2 * m + 1; ++j) CHECK(half_sphere_multiplicity(n, j) == odd_harmonic_count(n, j));
    }
}

TEST_CASE("odd harmonics are harmonic, odd and orthonormal on the sphere") {
  for (int n : {1, 2})
    for (int j = 1; j <= 4; ++j) {
      auto hs = odd_harmonics(n, j);
      CHECK(static_cast<int>(hs.size()) == odd_harmonic_count(n, j));
      for (std::size_t a = 0; a < hs.size(); ++a) {
        CHECK(hs[a].laplacian(n + 1).is_zero(1e-10));
        CHECK(hs[a].is_homogeneous(j, 1e-12));
        CHECK(trace_norm(n, hs[a]) == doctest::Approx(1.0));
      }
    }
}

TEST_CASE("eigenvalues approach the half-circle spectrum as delta shrinks") {
  GridPtr g = build_grid(1, 720);
  auto rep = verify_spectral_convergence(g, catalog_profile(0, 1), {0.4, 0.2, 0.1}, 3);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.monotone);
  CHECK(rep.rows[2].max_eigenvalue_error <= rep.rows[0].max_eigenvalue_error);
}

TEST_CASE("traces from coefficients agree with mode sums") {
  GridPtr g = build_grid(1, 360);
  BasisPtr b = half_sphere_basis(1, 4, g);
  Eigen::VectorXd c(4);
  c << 0.3, -0.2, 0.1, 0.05;
  SphericalTrace t = trace_from_coefficients(b, c);
  Eigen::VectorXd back = b->project(t.values);
  CHECK((back - c).norm() < 1e-6);
}

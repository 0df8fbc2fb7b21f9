#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "thin_epi/catalog.hpp"

using namespace thin_epi;

namespace {

// Midpoint rule on the circle, independent of the library quadratures.
double circle_norm2(const std::function<double(double)>& f, int N = 20000) {
  double s = 0;
  for (int i = 0; i < N; ++i) {
    double t = 2.0 * kPi * (i + 0.5) / N;
    s += f(t) * f(t);
  }
  return s * 2.0 * kPi / N;
}

double fd_laplacian(const std::function<double(const Vec3&)>& f, const Vec3& x, int dims, double h = 1e-3) {
  double s = 0;
  for (int a = 0; a < dims; ++a) {
    Vec3 p = x, m = x;
    p[a] += h;
    m[a] -= h;
    s += f(p) - 2.0 * f(x) + f(m);
  }
  return s / (h * h);
}

}  // namespace

TEST_CASE("catalog profiles are admissible and normalized") {
  for (int n : {1, 2})
    for (int m : {0, 1, 2}) {
      BlowupProfile p = catalog_profile(m, n);
      AdmissibilityReport r = verify_admissible(p);
      CHECK(r.ok());
      CHECK(p.degree() == 2 * m + 1);
      CHECK(trace_norm(n, p.odd_harmonic()) == doctest::Approx(1.0));
    }
  BlowupProfile p = catalog_profile(0, 1);
  CHECK(circle_norm2([&](double t) { return p({std::cos(t), std::sin(t), 0}); }) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(p({0.3, 0.4, 0}) <= 0.0);
  CHECK(p({0.3, -0.4, 0}) == doctest::Approx(p({0.3, 0.4, 0})));
}

TEST_CASE("profiles reject a sign change in p0") {
  CHECK_THROWS_AS(make_profile(0, 1, Polynomial::constant(-1.0)), Error);
  Polynomial x1 = Polynomial::variable(0);
  CHECK_THROWS_AS(profile_from_p0(1, 1, x1 * x1 - Polynomial::constant(0.5)), Error);
}

TEST_CASE("profile_from_p0 yields a harmonic profile off the plane") {
  Polynomial x1 = Polynomial::variable(0), x2 = Polynomial::variable(1);
  BlowupProfile p = profile_from_p0(1, 2, x1 * x1 + x2 * x2 * 0.5);
  auto f = [&](const Vec3& x) { return p(x); };
  for (Vec3 x : {Vec3{0.2, 0.1, 0.3}, Vec3{-0.4, 0.2, 0.5}, Vec3{0.1, -0.3, -0.2}})
    CHECK(std::abs(fd_laplacian(f, x, 3)) < 1e-4);
  CHECK(verify_admissible(p).ok());
}

TEST_CASE("operator T returns the normal slope on the thin plane") {
  for (int n : {1, 2}) {
    BlowupProfile p = catalog_profile(1, n);
    Polynomial T = operator_T(p);
    Vec3 x{0.6, n == 2 ? 0.3 : 0.0, 0.0};
    Vec3 up = x;
    const double e = 1e-6;
    up[n] = e;
    CHECK(T(x) == doctest::Approx(-p(up) / e).epsilon(1e-5));
  }
}

TEST_CASE("zero set masks equator nodes where T[p] reaches delta") {
  GridPtr g = build_grid(1, 360);
  BlowupProfile p = catalog_profile(0, 1);
  EquatorMask all = zero_set(p, 0.1, *g);
  CHECK(std::count(all.begin(), all.end(), 1) == 2);
  EquatorMask none = zero_set(p, 10.0, *g);
  CHECK(std::count(none.begin(), none.end(), 1) == 0);
  CHECK_THROWS_AS(zero_set(p, -0.1, *g), Error);
}

TEST_CASE("profile JSON round trip") {
  BlowupProfile p = catalog_profile(1, 2);
  BlowupProfile q = profile_from_json(profile_to_json(p));
  for (Vec3 x : {Vec3{0.1, 0.2, 0.3}, Vec3{-0.5, 0.1, -0.7}}) CHECK(q(x) == doctest::Approx(p(x)));
}

TEST_CASE("planar homogeneous solutions") {
  for (double mu : {1.5, 2.0, 3.0, 3.5, 4.0, 5.0}) {
    REQUIRE(in_A1(mu));
    HalfspaceSolution2D s = halfspace_2d(mu);
    auto f = [&](const Vec3& x) { return s(x); };
    for (Vec3 x : {Vec3{0.3, 0.2, 0}, Vec3{-0.4, 0.35, 0}, Vec3{0.1, -0.5, 0}})
      CHECK(std::abs(fd_laplacian(f, x, 2)) < 1e-4);
    Vec3 x{0.3, 0.4, 0};
    CHECK(s(0.5 * x) == doctest::Approx(std::pow(0.5, mu) * s(x)));
    CHECK(s({0.3, -0.4, 0}) == doctest::Approx(s(x)));
    CHECK(circle_norm2([&](double t) { return s({std::cos(t), std::sin(t), 0}); }) ==
          doctest::Approx(s.trace_norm2()).epsilon(1e-8));
    // u >= 0 on the thin line and u = 0 wherever the normal slope is nonzero.
    for (double x1 : {-0.7, -0.2, 0.2, 0.7}) {
      const double u = s({x1, 0, 0});
      CHECK(u >= -1e-14);
      const double slope = (s({x1, 1e-6, 0}) - u) / 1e-6;
      if (std::abs(slope) > 1e-4) CHECK(std::abs(u) < 1e-12);
    }
  }
  CHECK_FALSE(in_A1(1.3));
  CHECK_FALSE(in_A1(2.5));
  CHECK_THROWS_AS(halfspace_2d(1.3), Error);
}

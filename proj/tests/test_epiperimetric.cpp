#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "thin_epi/epiperimetric.hpp"

using namespace thin_epi;

namespace {

SphericalTrace p_plus(const EpiContext& ctx, int mode, double eps) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(ctx.half->count());
  c[ctx.ell - 1] = trace_norm(ctx.n, ctx.p.odd_harmonic());
  c[mode] += eps;
  return trace_from_coefficients(ctx.half, c);
}

}  // namespace

TEST_CASE("positive case against a hand-computed perturbation") {
  EpiContext ctx = choose_delta(catalog_profile(0, 1), build_grid(1, 720));
  CHECK(ctx.exact());
  const double eps = 0.05;
  EpiReport r = verify_epi(p_plus(ctx, 1, eps), ctx);
  // Degree-2 mode (lambda = 4) at mu = 1: W(z) = 3/2 eps^2; the competitor
  // raises it to degree 3/2, giving 13/12 eps^2, and kappa = 1/5.
  CHECK_FALSE(r.negative_case);
  CHECK(r.kappa == doctest::Approx(0.2));
  CHECK(r.w_z == doctest::Approx(1.5 * eps * eps).epsilon(1e-8));
  CHECK(r.w_zeta == doctest::Approx(13.0 / 12.0 * eps * eps).epsilon(1e-8));
  CHECK(r.slack == doctest::Approx(7.0 / 60.0 * eps * eps).epsilon(1e-6));
  CHECK(r.zeta.ok());
  CHECK(r.discrepancy < 1e-6);
}

TEST_CASE("random positive traces satisfy the inequality") {
  for (auto [m, n, res] : {std::tuple{0, 1, 720}, std::tuple{1, 1, 720}, std::tuple{0, 2, 32}}) {
    EpiConfig cfg;
    EpiContext ctx = choose_delta(catalog_profile(m, n), build_grid(n, res), cfg);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 5; ++t) {
      EpiReport r = verify_epi(random_positive_trace(ctx, cfg, rng), ctx, cfg);
      CHECK_FALSE(r.violation);
      CHECK(r.slack >= -1e-8);
      CHECK(r.zeta.ok());
      CHECK(r.distance_to_p <= cfg.eps + 1e-12);
    }
  }
}

TEST_CASE("traces far from p are rejected") {
  EpiContext ctx = choose_delta(catalog_profile(0, 1), build_grid(1, 720));
  CHECK_THROWS_AS(verify_epi(p_plus(ctx, 1, 0.5), ctx), Error);
}

TEST_CASE("negative case builds a competitor below the bound") {
  EpiConfig cfg;
  EpiContext ctx = choose_delta(catalog_profile(1, 1), build_grid(1, 720), cfg);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    NegativeResult res = build_competitor_negative(random_negative_trace(ctx, cfg, rng), ctx, cfg);
    CHECK(res.report.negative_case);
    CHECK(res.report.w_z < 0.0);
    CHECK(res.report.alpha > 2.0);
    CHECK(res.report.alpha < 3.0);
    CHECK(res.report.slack >= -1e-8);
    CHECK(res.phi_norm2 <= res.norm_bound + 1e-12);
  }
  EpiContext ctx0 = choose_delta(catalog_profile(0, 1), build_grid(1, 720), cfg);
  CHECK_THROWS_AS(random_negative_trace(ctx0, cfg, rng), Error);
}

TEST_CASE("alpha root of the negative-case equation") {
  for (double w : {0.01, 0.1, 0.15}) {
    const double a = solve_alpha_negative(w, 1, 1);
    CHECK(a > 2.0);
    CHECK(a < 3.0);
    CHECK((3.0 - a) / (1.0 + a + 3.0 - 1.0) == doctest::Approx(w).epsilon(1e-10));
  }
  CHECK(solve_alpha_negative(0.0, 1, 1) == 3.0);
  // (3 - 2)/(1 + 2 + 2) = 1/5 is the largest value reachable in (2, 3).
  CHECK_THROWS_AS(solve_alpha_negative(0.3, 1, 1), Error);
}

TEST_CASE("off-degree identities for planar solutions") {
  // mu = 1, t = 1/2: W_1(r^{3/2} c) = t ||c||^2 = pi/2.
  OffDegreeReport a = weiss_of_offdegree(halfspace_2d(1.5), 1.0);
  CHECK(a.shifted_exact == doctest::Approx(kPi / 2));
  CHECK(a.shifted_quad == doctest::Approx(kPi / 2).epsilon(1e-8));
  CHECK(a.discrepancy_exact < 1e-12);
  CHECK(a.discrepancy_quad < 1e-8);
  OffDegreeReport b = weiss_of_offdegree(halfspace_2d(2.0), 1.0);
  CHECK(b.shifted_exact == doctest::Approx(kPi));
  OffDegreeReport c = weiss_of_offdegree(halfspace_2d(3.0), 1.0);
  CHECK(c.shifted_exact == doctest::Approx(2 * kPi));
  CHECK(c.discrepancy_quad < 1e-8);
}

TEST_CASE("gap demo contradicts both branches") {
  for (auto [n, m] : {std::pair{1, 0}, std::pair{1, 1}, std::pair{2, 0}}) {
    GapReport g = gap_demo(m, n, {1e-3, 1e-2, 0.05, -1e-3, -1e-2, -0.05});
    CHECK(g.all_contradict);
    CHECK(g.C == doctest::Approx(1.0 / (n + 2.0 * (2 * m + 1) - 1.0)));
    for (const auto& row : g.rows) CHECK(row.contradiction);
  }
  GapReport g = gap_demo(0, 1, {0.01});
  CHECK(g.a1_in_window.empty());
  CHECK(g.a1_nearest_above == doctest::Approx(1.5));
}

TEST_CASE("A_1 members") {
  std::vector<double> a = a1_members(4.0);
  std::vector<double> expect{1.5, 2.0, 3.0, 3.5, 4.0};
  REQUIRE(a.size() >= expect.size());
  for (double e : expect) CHECK(std::find_if(a.begin(), a.end(), [&](double x) { return std::abs(x - e) < 1e-12; }) != a.end());
  for (double x : a) CHECK(in_A1(x));
}

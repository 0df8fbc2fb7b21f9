#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "thin_epi/frequency.hpp"

using namespace thin_epi;

namespace {

FieldSource planar(double mu) {
  HalfspaceSolution2D s = halfspace_2d(mu);
  return field_from(BallFunction::callable(1, [s](const Vec3& x) { return s(x); }));
}

double unscaled(const FrequencyProfile& p, std::size_t i) {
  return p.Phi[i] / (1.0 + p.params.C_phi * std::pow(p.radii[i], p.params.theta));
}

}  // namespace

TEST_CASE("radii ladder") {
  auto r = radii_ladder(0.5, 0.5 / 16, 4);
  REQUIRE(r.size() == 17);
  CHECK(r.front() == 0.5);
  CHECK(r.back() == doctest::Approx(0.5 / 16));
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] < r[i - 1]);
}

TEST_CASE("surface moments of a homogeneous function") {
  // v = r^{3/2} c: H(r) = pi r^{n+2 mu}, I(r) = mu H(r)/r.
  FieldSource f = planar(1.5);
  for (double r : {0.5, 0.1}) {
    SurfaceMoments m = surface_moments(f, {0, 0, 0}, r);
    CHECK(m.H == doctest::Approx(kPi * std::pow(r, 4.0)).epsilon(1e-8));
    CHECK(m.I == doctest::Approx(1.5 * m.H / r).epsilon(1e-6));
  }
}

TEST_CASE("homogeneous solutions have constant frequency n + 2 mu") {
  for (auto [mu, k] : {std::pair{1.5, 2}, std::pair{2.0, 2}, std::pair{3.0, 3}}) {
    FrequencyParams P;
    P.k = k;
    FrequencyProfile prof = truncated_frequency(planar(mu), {0, 0, 0}, P, radii_ladder(0.5, 1e-3));
    for (std::size_t i = 0; i < prof.radii.size(); ++i) {
      CHECK(std::abs(unscaled(prof, i) - (1.0 + 2.0 * mu)) < 1e-6);
      CHECK_FALSE(prof.truncated[i]);
    }
    REQUIRE(frequency_plateau(prof).has_value());
    CHECK(*frequency_plateau(prof) == doctest::Approx(mu).epsilon(1e-6));
    CHECK(prof.max_violation <= 1e-9);
  }
  BlowupProfile p = catalog_profile(0, 2);
  FieldSource f = field_from(BallFunction::callable(2, [p](const Vec3& x) { return p(x); }));
  FrequencyProfile prof = truncated_frequency(f, {0, 0, 0}, {}, radii_ladder(0.5, 1e-2));
  for (std::size_t i = 0; i < prof.radii.size(); ++i) CHECK(std::abs(unscaled(prof, i) - 4.0) < 1e-6);
}

TEST_CASE("the truncation takes over above degree k + gamma - theta") {
  FrequencyParams P;  // k + gamma - theta = 2.25
  FrequencyProfile prof = truncated_frequency(planar(3.0), {0, 0, 0}, P, radii_ladder(0.5, 1e-3));
  CHECK(prof.truncated.back());
  CHECK(unscaled(prof, prof.radii.size() - 1) == doctest::Approx(1.0 + 2.0 * 2.25).epsilon(1e-6));
}

TEST_CASE("plateau labels") {
  CHECK(*frequency_label(1.52, {1.0, 1.5, 2.0}, 0.1) == 1.5);
  CHECK_FALSE(frequency_label(1.75, {1.0, 1.5, 2.0}, 0.1).has_value());
}

TEST_CASE("grid fields refuse radii below three cells") {
  ProblemSpec s;
  s.N = 32;
  s.obstacle = [](const Vec3&) { return 0.0; };
  s.boundary = halfspace_2d(1.5).trace();
  GridSolution sol = solve_thin_obstacle(s);
  FieldSource f = field_from(sol);
  CHECK_THROWS_AS(surface_moments(f, {0, 0, 0}, 2.0 / 32), Error);
  CHECK_THROWS_AS(surface_moments(f, {0.8, 0, 0}, 0.5), Error);
  CHECK_THROWS_AS(surface_moments(f, {0, 0.1, 0}, 0.2), Error);
  FrequencyProfile prof = truncated_frequency(f, {0, 0, 0}, {}, radii_ladder(0.5, 6.0 / 32));
  REQUIRE(frequency_plateau(prof).has_value());
  CHECK(*frequency_plateau(prof) == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("rescalings") {
  FieldSource f = planar(1.5);
  Rescaled a = rescale(f, {0, 0, 0}, 0.2, RescaleMode::L2Normalized);
  CHECK(a.normalizer == doctest::Approx(std::sqrt(kPi) * std::pow(0.2, 1.5)).epsilon(1e-8));
  CHECK(surface_moments(a.field, {0, 0, 0}, 1.0).H == doctest::Approx(1.0).epsilon(1e-8));
  Rescaled b = rescale(f, {0, 0, 0}, 0.2, RescaleMode::Homogeneous, 1.5);
  CHECK(b.field.value({0.3, 0.4, 0}) == doctest::Approx(f.value({0.3, 0.4, 0})).epsilon(1e-10));
}

TEST_CASE("blowup fit recovers the rate of a constructed perturbation") {
  BlowupProfile p = catalog_profile(0, 1);
  HalfspaceSolution2D s = halfspace_2d(1.5);
  FieldSource f = field_from(BallFunction::callable(1, [p, s](const Vec3& x) { return p(x) + 0.3 * s(x); }));
  BlowupFit fit = blowup_fit(f, {0, 0, 0}, 0, radii_ladder(0.25, 1e-6));
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.in_catalog);
  CHECK(fit.exponent == doctest::Approx(0.5).epsilon(1e-6));
  REQUIRE(fit.plateau.has_value());
  CHECK(*fit.plateau == doctest::Approx(1.0).epsilon(0.01));

  FieldSource pure = field_from(BallFunction::callable(1, [p](const Vec3& x) { return p(x); }));
  CHECK(blowup_fit(pure, {0, 0, 0}, 0, radii_ladder(0.25, 1e-3)).degenerate);
  // Plateau 3/2 does not match 2m + 1 = 1.
  CHECK_THROWS_AS(blowup_fit(planar(1.5), {0, 0, 0}, 0, radii_ladder(0.25, 1e-3)), Error);
  CHECK_THROWS_AS(blowup_fit(f, {0, 0, 0}, 0, {0.25, 0.2}), Error);
}

TEST_CASE("near-profile checks on the profile itself") {
  BlowupProfile p = catalog_profile(0, 1);
  FieldSource f = field_from(BallFunction::callable(1, [p](const Vec3& x) { return p(x); }));
  Rescaled w = rescale(f, {0, 0, 0}, 1.0, RescaleMode::L2Normalized);
  VanishingReport v = vanishing_on_Zdelta_check(w.field, 1.0, p, 0.1, 0.5, 1e-12);
  CHECK(v.hypothesis);
  CHECK(v.linf_distance < 1e-10);
  CHECK(v.max_sup < 1e-12);
  CHECK(v.passed);
  LinfL2Report l = linfty_l2_check(w.field, p, 1.0);
  CHECK(l.linf < 1e-10);
  CHECK(l.sigma == doctest::Approx(0.25));
}

TEST_CASE("Weiss derivative matches the radial bound for a homogeneous solution") {
  FieldSource f = planar(1.5);
  WeissMonotonicityReport rep = weiss_monotonicity_check(f, {0, 0, 0}, 1.0, radii_ladder(0.5, 0.01), 0.0);
  CHECK(rep.violations.empty());
  for (const WeissRow& row : rep.rows) CHECK(row.derivative == doctest::Approx(row.bound_radial).epsilon(1e-4));
  OscillationReport osc = oscillation_bound_check(f, {0, 0, 0}, 1.0, 0.5, 0.05);
  CHECK(osc.constant > 0.0);
  CHECK(std::isfinite(osc.constant));
}

TEST_CASE("stratification labels the contact set of the 3/2 solution") {
  ProblemSpec s;
  s.N = 64;
  s.obstacle = [](const Vec3&) { return 0.0; };
  s.boundary = halfspace_2d(1.5).trace();
  GridSolution sol = solve_thin_obstacle(s);
  Stratification st = stratify_contact(sol, s, {1.0, 1.5, 2.0, 3.0}, {}, 4);
  REQUIRE_FALSE(st.nodes.empty());
  int ones = 0;
  for (std::size_t i = 0; i < st.nodes.size(); ++i)
    if (st.label[i] != "unresolved" && st.nodes[i][0] < -0.25) {
      CHECK(st.label[i] == "1");
      ++ones;
    }
  CHECK(ones > 0);
}

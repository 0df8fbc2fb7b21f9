#include "thin_epi/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

namespace thin_epi {

namespace {

Polynomial power_of(const Polynomial& p, int k) {
  Polynomial r = Polynomial::constant(1.0);
  for (int i = 0; i < k; ++i) r = r * p;
  return r;
}

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace

Polynomial BlowupProfile::odd_harmonic() const {
  Polynomial z = Polynomial::variable(n);
  return z * (p0 + z * z * p1) * (-scale);
}

double BlowupProfile::operator()(const Vec3& x) const {
  double z = x[n];
  return -scale * std::abs(z) * (p0(x) + z * z * p1(x));
}

Vec3 BlowupProfile::gradient(const Vec3& x) const {
  Vec3 u = x;
  bool lower = u[n] < 0.0;
  u[n] = std::abs(u[n]);
  Vec3 g = odd_harmonic().gradient(u);
  if (lower) g[n] = -g[n];
  return g;
}

SphereFn BlowupProfile::trace() const { return polynomial_trace(odd_harmonic(), n); }

BlowupProfile make_profile(int m, int n, const Polynomial& p0, const Polynomial& p1, bool normalize) {
  require(n == 1 || n == 2, "make_profile: unsupported dimension");
  require(m >= 0, "make_profile: m must be nonnegative");
  require(p0.max_power(n) == 0, "make_profile: p0 must depend on x' only");
  for (const auto& [e, c] : p0.terms())
    for (int v = n + 1; v < 3; ++v) require(e[v] == 0, "make_profile: p0 uses a variable beyond x_{n+1}");
  require(p0.is_homogeneous(2 * m), "make_profile: p0 must be homogeneous of degree 2m");
  require(!p0.is_zero(), "make_profile: p0 must not vanish identically");
  if (m == 0) {
    require(p1.is_zero(), "make_profile: p1 must vanish when m = 0");
  } else {
    require(p1.is_homogeneous(2 * m - 2), "make_profile: p1 must be homogeneous of degree 2m-2");
  }
  BlowupProfile p;
  p.m = m;
  p.n = n;
  p.p0 = p0;
  p.p1 = p1;
  AdmissibilityReport rep = verify_admissible(p);
  if (!rep.superharmonic) fail(ErrorCode::Precondition, "make_profile: p0 changes sign (superharmonicity violated)");
  if (!rep.harmonic) fail(ErrorCode::Precondition, "make_profile: p is not harmonic off the thin plane");
  if (!rep.even) fail(ErrorCode::Precondition, "make_profile: p is not even in x_{n+1}");
  if (!rep.ok()) fail(ErrorCode::Precondition, "make_profile: admissibility check failed");
  if (normalize) p.scale = 1.0 / trace_norm(n, p.odd_harmonic());
  return p;
}

BlowupProfile profile_from_p0(int m, int n, const Polynomial& p0, bool normalize) {
  // H = -sum_j (-1)^j z^{2j+1}/(2j+1)! Lap'^j p0 is the odd harmonic with
  // normal derivative -p0 on the plane.
  Polynomial z = Polynomial::variable(n);
  Polynomial p1;
  Polynomial lap = p0;
  for (int j = 1; j <= m; ++j) {
    lap = lap.laplacian(n);
    Polynomial t = lap * ((j % 2 ? -1.0 : 1.0) / factorial(2 * j + 1));
    t = t * power_of(z, 2 * j - 2);
    p1 += t;
  }
  return make_profile(m, n, p0, p1, normalize);
}

BlowupProfile catalog_profile(int m, int n) {
  require(n == 1 || n == 2, "catalog_profile: unsupported dimension");
  Polynomial x1 = Polynomial::variable(0);
  Polynomial p0 = n == 1 ? power_of(x1, 2 * m)
                         : power_of(x1 * x1 + Polynomial::variable(1) * Polynomial::variable(1), m);
  return profile_from_p0(m, n, p0, true);
}

Polynomial operator_T(const BlowupProfile& p) { return p.p0 * p.scale; }

EquatorMask zero_set(const BlowupProfile& p, double delta, const SphereGrid& grid) {
  require(delta >= 0.0, "zero_set: delta must be nonnegative");
  require(grid.n == p.n, "zero_set: grid dimension mismatch");
  Polynomial t = operator_T(p);
  EquatorMask mask(grid.equator.size(), 0);
  for (std::size_t e = 0; e < grid.equator.size(); ++e) mask[e] = t(grid.nodes[grid.equator[e]]) >= delta ? 1 : 0;
  return mask;
}

AdmissibilityReport verify_admissible(const BlowupProfile& p, double tol, int samples) {
  AdmissibilityReport r;
  const int n = p.n, d = p.degree();
  Polynomial H = p.odd_harmonic();
  Polynomial lapH = H.laplacian(n + 1);
  std::mt19937_64 rng(977);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double pmax = 0.0, lap_max = 0.0, euler_max = 0.0, parity_max = 0.0, plane_max = 0.0;
  double p0_min = std::numeric_limits<double>::infinity(), p0_max = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec3 x{0, 0, 0};
    for (int v = 0; v <= n; ++v) x[v] = gauss(rng);
    double r = norm(x);
    double rad = std::pow(unif(rng), 1.0 / (n + 1));
    x = (rad / r) * x;
    if (std::abs(x[n]) < 1e-3) x[n] = x[n] < 0 ? -1e-3 : 1e-3;
    double val = p(x);
    pmax = std::max(pmax, std::abs(val));
    lap_max = std::max(lap_max, std::abs(lapH(x)));
    euler_max = std::max(euler_max, std::abs(dot(p.gradient(x), x) - d * val));
    parity_max = std::max(parity_max, std::abs(val - p(reflect(x, n))));
    Vec3 xp = x;
    xp[n] = 0.0;
    plane_max = std::max(plane_max, std::abs(p(xp)));
    // p0 on the unit sphere of the thin plane
    double rp = 0.0;
    for (int v = 0; v < n; ++v) rp += xp[v] * xp[v];
    rp = std::sqrt(rp);
    if (rp > 1e-12) {
      double q = p.p0((1.0 / rp) * xp);
      p0_min = std::min(p0_min, q);
      p0_max = std::max(p0_max, std::abs(q));
    }
  }
  double scale = std::max(pmax, 1e-300);
  r.harmonic_residual = lap_max / scale;
  r.euler_residual = euler_max / scale;
  r.parity_residual = parity_max / scale;
  r.plane_residual = plane_max / scale;
  r.min_p0 = p0_min;
  r.harmonic = r.harmonic_residual <= tol;
  r.homogeneous = r.euler_residual <= tol;
  r.even = r.parity_residual <= tol;
  r.vanishes_on_plane = r.plane_residual <= tol;
  r.superharmonic = p0_min >= -tol * std::max(p0_max, 1e-300);
  return r;
}

namespace {

nlohmann::json poly_json(const Polynomial& q) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [e, c] : q.terms()) arr.push_back({{"coef", c}, {"exp", {e[0], e[1], e[2]}}});
  return arr;
}

Polynomial poly_from(const nlohmann::json& arr) {
  Polynomial q;
  for (const auto& t : arr) {
    auto e = t.at("exp").get<std::vector<int>>();
    require(e.size() == 3, "profile_from_json: exponents need three entries");
    q += Polynomial::monomial({e[0], e[1], e[2]}, t.at("coef").get<double>());
  }
  return q;
}

}  // namespace

std::string profile_to_json(const BlowupProfile& p) {
  nlohmann::json j;
  j["m"] = p.m;
  j["n"] = p.n;
  j["p0"] = poly_json(p.p0);
  j["p1"] = poly_json(p.p1);
  j["normalization"] = p.scale;
  return j.dump();
}

BlowupProfile profile_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  BlowupProfile p = make_profile(j.at("m").get<int>(), j.at("n").get<int>(), poly_from(j.at("p0")), poly_from(j.at("p1")),
                                 false);
  p.scale = j.at("normalization").get<double>();
  return p;
}

namespace {

enum class Family { HalfOdd, Even, Odd };

Family family_of(double mu) {
  double twice = 2.0 * mu;
  if (std::abs(twice - std::round(twice)) > 1e-12) fail(ErrorCode::InvalidArgument, "halfspace_2d: mu not in A_1");
  long k = std::lround(twice);
  if (k % 2 != 0) {
    // mu = k/2 must equal 2m - 1/2, i.e. k = 4m - 1
    if ((k + 1) % 4 == 0 && k >= 3) return Family::HalfOdd;
    fail(ErrorCode::InvalidArgument, "halfspace_2d: mu not in A_1");
  }
  long q = k / 2;
  if (q >= 2 && q % 2 == 0) return Family::Even;
  if (q >= 1 && q % 2 == 1) return Family::Odd;
  fail(ErrorCode::InvalidArgument, "halfspace_2d: mu not in A_1");
}

}  // namespace

bool in_A1(double mu) {
  try {
    family_of(mu);
    return true;
  } catch (const Error&) {
    return false;
  }
}

HalfspaceSolution2D halfspace_2d(double mu) {
  family_of(mu);
  HalfspaceSolution2D s;
  s.mu = mu;
  return s;
}

double HalfspaceSolution2D::trace_value(double t) const {
  return family_of(mu) == Family::Odd ? -std::sin(mu * t) : std::cos(mu * t);
}

double HalfspaceSolution2D::trace_derivative(double t) const {
  return family_of(mu) == Family::Odd ? -mu * std::cos(mu * t) : -mu * std::sin(mu * t);
}

double HalfspaceSolution2D::operator()(const Vec3& x) const {
  double r = std::hypot(x[0], x[1]);
  if (r == 0.0) return 0.0;
  double t = x[1] == 0.0 ? (x[0] >= 0 ? 0.0 : kPi) : std::abs(std::atan2(x[1], x[0]));
  return std::pow(r, mu) * trace_value(t);
}

Vec3 HalfspaceSolution2D::gradient(const Vec3& x) const {
  double r = std::hypot(x[0], x[1]);
  if (r == 0.0) return {0, 0, 0};
  double t = x[1] == 0.0 ? (x[0] >= 0 ? 0.0 : kPi) : std::abs(std::atan2(x[1], x[0]));
  double sgn = x[1] < 0.0 ? -1.0 : 1.0;
  double rm = std::pow(r, mu - 1.0);
  double c = trace_value(t), dc = sgn * trace_derivative(t);
  Vec3 er{x[0] / r, x[1] / r, 0.0}, et{-x[1] / r, x[0] / r, 0.0};
  return rm * (mu * c) * er + (rm * dc) * et;
}

SphereFn HalfspaceSolution2D::trace() const {
  HalfspaceSolution2D self = *this;
  return angular_trace([self](double t) { return self.trace_value(t); },
                       [self](double t) { return self.trace_derivative(t); });
}

}  // namespace thin_epi

#include "thin_epi/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "thin_epi/quadrature.hpp"

namespace thin_epi {

namespace {

double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  double num = std::abs(dot(a, cross(b, c)));
  double den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
  return 2.0 * std::atan2(num, den);
}

Vec3 normalized(const Vec3& v) {
  double r = norm(v);
  return {v[0] / r, v[1] / r, v[2] / r};
}

void finish_upper(SphereGrid& g) {
  g.upper.clear();
  g.upper_pos.assign(g.nodes.size(), -1);
  for (int i = 0; i < g.size(); ++i) {
    if (g.nodes[i][g.n] >= 0.0) {
      g.upper_pos[i] = static_cast<int>(g.upper.size());
      g.upper.push_back(i);
    }
    if (g.nodes[i][g.n] == 0.0) g.equator.push_back(i);
  }
}

GridPtr build_uniform(int resolution) {
  require(resolution % 2 == 0, "build_grid: S^1 resolution must be even so that theta = pi is a node");
  auto g = std::make_shared<SphereGrid>();
  g->n = 1;
  g->kind = GridKind::Uniform;
  g->resolution = resolution;
  const int N = resolution;
  const double h = 2.0 * kPi / N;
  for (int i = 0; i < N; ++i) {
    double t = h * i;
    Vec3 p{std::cos(t), std::sin(t), 0.0};
    if (i == 0) p = {1.0, 0.0, 0.0};
    if (2 * i == N) p = {-1.0, 0.0, 0.0};
    g->nodes.push_back(p);
    g->weights.push_back(h);
    g->reflection.push_back((N - i) % N);
  }
  finish_upper(*g);
  const int nu = N / 2 + 1;
  std::vector<Eigen::Triplet<double>> trip;
  g->mass = Eigen::VectorXd::Constant(nu, h);
  g->mass(0) = g->mass(nu - 1) = 0.5 * h;
  for (int i = 0; i + 1 < nu; ++i) {
    trip.emplace_back(i, i, 1.0 / h);
    trip.emplace_back(i + 1, i + 1, 1.0 / h);
    trip.emplace_back(i, i + 1, -1.0 / h);
    trip.emplace_back(i + 1, i, -1.0 / h);
  }
  g->stiffness.resize(nu, nu);
  g->stiffness.setFromTriplets(trip.begin(), trip.end());
  return g;
}

GridPtr build_octahedral(int resolution) {
  require(resolution % 4 == 0, "build_grid: octahedral resolution must be a multiple of 4");
  auto g = std::make_shared<SphereGrid>();
  g->n = 2;
  g->kind = GridKind::Octahedral;
  g->resolution = resolution;
  const int N = resolution / 4;
  g->subdivisions = N;

  std::map<std::array<int, 3>, int> index;
  std::vector<std::array<int, 3>> keys;
  auto node_of = [&](const std::array<int, 3>& key) {
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(keys.size());
    index.emplace(key, id);
    keys.push_back(key);
    return id;
  };
  // Enumerate octants with the upper ones first so that node ids of the
  // upper half are small; the ordering itself carries no meaning.
  const int signs[8][3] = {{1, 1, 1},  {-1, 1, 1},  {-1, -1, 1},  {1, -1, 1},
                           {1, 1, -1}, {-1, 1, -1}, {-1, -1, -1}, {1, -1, -1}};
  auto key_of = [&](int o, int i, int j) {
    int k = N - i - j;
    return std::array<int, 3>{signs[o][0] * i, signs[o][1] * j, signs[o][2] * k};
  };
  g->locate_table.assign(8 * (N + 1) * (N + 1) * 2, -1);
  for (int o = 0; o < 8; ++o) {
    for (int i = 0; i < N; ++i) {
      for (int j = 0; i + j < N; ++j) {
        int a = node_of(key_of(o, i, j)), b = node_of(key_of(o, i + 1, j)), c = node_of(key_of(o, i, j + 1));
        g->locate_table[((o * (N + 1) + i) * (N + 1) + j) * 2 + 0] = static_cast<int>(g->triangles.size());
        g->triangles.push_back({a, b, c});
        if (i + j <= N - 2) {
          int d = node_of(key_of(o, i + 1, j + 1));
          g->locate_table[((o * (N + 1) + i) * (N + 1) + j) * 2 + 1] = static_cast<int>(g->triangles.size());
          g->triangles.push_back({b, d, c});
        }
      }
    }
  }
  for (const auto& key : keys) {
    Vec3 p = normalized({double(key[0]), double(key[1]), double(key[2])});
    if (key[2] == 0) p[2] = 0.0;
    if (key[0] == 0) p[0] = 0.0;
    if (key[1] == 0) p[1] = 0.0;
    g->nodes.push_back(p);
  }
  for (const auto& key : keys) g->reflection.push_back(index.at({key[0], key[1], -key[2]}));
  finish_upper(*g);

  g->weights.assign(g->nodes.size(), 0.0);
  const int nu = static_cast<int>(g->upper.size());
  g->mass = Eigen::VectorXd::Zero(nu);
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& t : g->triangles) {
    const Vec3 &a = g->nodes[t[0]], &b = g->nodes[t[1]], &c = g->nodes[t[2]];
    double area = spherical_triangle_area(a, b, c);
    for (int v : t) g->weights[v] += area / 3.0;
    Eigen::Matrix3d m;
    m << a[0], b[0], c[0], a[1], b[1], c[1], a[2], b[2], c[2];
    g->triangle_inverse.push_back(m.inverse());

    bool up = a[2] >= 0 && b[2] >= 0 && c[2] >= 0;
    if (!up) continue;
    for (int v : t) g->mass(g->upper_pos[v]) += area / 3.0;
    for (int e = 0; e < 3; ++e) {
      int i = t[e], j = t[(e + 1) % 3], k = t[(e + 2) % 3];
      Vec3 u = g->nodes[i] - g->nodes[k], w = g->nodes[j] - g->nodes[k];
      double cot = dot(u, w) / norm(cross(u, w));
      int pi = g->upper_pos[i], pj = g->upper_pos[j];
      trip.emplace_back(pi, pi, 0.5 * cot);
      trip.emplace_back(pj, pj, 0.5 * cot);
      trip.emplace_back(pi, pj, -0.5 * cot);
      trip.emplace_back(pj, pi, -0.5 * cot);
    }
  }
  g->stiffness.resize(nu, nu);
  g->stiffness.setFromTriplets(trip.begin(), trip.end());
  return g;
}

GridPtr build_latlong(int resolution) {
  require(resolution % 4 == 0, "build_grid: lat-long resolution must be a multiple of 4");
  auto g = std::make_shared<SphereGrid>();
  g->n = 2;
  g->kind = GridKind::LatLong;
  g->resolution = resolution;
  const int M = resolution;
  Rule1D z = gauss_radau(resolution / 4, 0.0, 1.0);
  const double dpsi = 2.0 * kPi / M;
  for (std::size_t k = 0; k < z.x.size(); ++k) {
    for (int side : {1, -1}) {
      if (k == 0 && side == -1) continue;
      double zz = side * z.x[k];
      double s = std::sqrt(std::max(0.0, 1.0 - zz * zz));
      double w = (k == 0 ? 2.0 : 1.0) * z.w[k] * dpsi;
      for (int l = 0; l < M; ++l) {
        double psi = dpsi * l;
        g->nodes.push_back({s * std::cos(psi), s * std::sin(psi), k == 0 ? 0.0 : zz});
        g->weights.push_back(w);
      }
    }
  }
  for (int i = 0; i < g->size(); ++i) {
    int ring = i / M, l = i % M;
    // ring 0 is the equator, then (+z_1, -z_1, +z_2, -z_2, ...)
    int mirror = ring == 0 ? ring : (ring % 2 == 1 ? ring + 1 : ring - 1);
    g->reflection.push_back(mirror * M + l);
  }
  finish_upper(*g);
  return g;
}

}  // namespace

GridPtr build_grid(int n, int resolution) {
  return build_grid(n, resolution, n == 1 ? GridKind::Uniform : GridKind::Octahedral);
}

GridPtr build_grid(int n, int resolution, GridKind kind) {
  require(n == 1 || n == 2, "build_grid: unsupported dimension " + std::to_string(n));
  require(resolution >= 16, "build_grid: resolution must be at least 16");
  if (n == 1) {
    require(kind == GridKind::Uniform, "build_grid: S^1 grids are uniform");
    return build_uniform(resolution);
  }
  require(kind != GridKind::Uniform, "build_grid: S^2 needs an octahedral or lat-long grid");
  return kind == GridKind::Octahedral ? build_octahedral(resolution) : build_latlong(resolution);
}

double SphereGrid::integrate(const Eigen::VectorXd& values) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += weights[i] * values[i];
  return s;
}

double SphereGrid::inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += weights[i] * a[i] * b[i];
  return s;
}

double SphereGrid::dirichlet_form(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  require(has_operator(), "dirichlet_form: grid carries no Laplace-Beltrami operator");
  Eigen::VectorXd ua = restrict_upper(a), ub = restrict_upper(b);
  return 2.0 * ua.dot(stiffness * ub);
}

double SphereGrid::dirichlet_energy(const Eigen::VectorXd& values) const { return dirichlet_form(values, values); }

Eigen::VectorXd SphereGrid::extend_even(const Eigen::VectorXd& up) const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) {
    int j = upper_pos[i] >= 0 ? i : reflection[i];
    v[i] = up[upper_pos[j]];
  }
  return v;
}

Eigen::VectorXd SphereGrid::restrict_upper(const Eigen::VectorXd& values) const {
  Eigen::VectorXd u(upper.size());
  for (std::size_t k = 0; k < upper.size(); ++k) u[k] = values[upper[k]];
  return u;
}

int SphereGrid::locate(const Vec3& w) const {
  if (kind == GridKind::Uniform) {
    const int N = resolution;
    if (w[1] == 0.0) return w[0] >= 0.0 ? 0 : N / 2 - 1;
    double t = std::atan2(w[1], w[0]);
    if (t < 0) t += 2.0 * kPi;
    int i = static_cast<int>(std::floor(t / (2.0 * kPi) * N));
    return std::clamp(i, 0, N - 1);
  }
  require(kind == GridKind::Octahedral, "locate: lat-long grids have no cells");
  const int N = subdivisions;
  int sx = w[0] >= 0 ? 0 : 1, sy = w[1] >= 0 ? 0 : 1, sz = w[2] >= 0 ? 0 : 1;
  // octant numbering matches the construction order
  static const int octant_of[2][2][2] = {{{0, 4}, {3, 7}}, {{1, 5}, {2, 6}}};
  int o = octant_of[sx][sy][sz];
  double l1 = std::abs(w[0]) + std::abs(w[1]) + std::abs(w[2]);
  double u = std::abs(w[0]) / l1 * N, v = std::abs(w[1]) / l1 * N;
  int i = std::clamp(static_cast<int>(std::floor(u)), 0, N - 1);
  int j = std::clamp(static_cast<int>(std::floor(v)), 0, N - 1 - i);
  double fu = u - i, fv = v - j;
  int slot = (fu + fv > 1.0 && i + j <= N - 2) ? 1 : 0;
  return locate_table[((o * (N + 1) + i) * (N + 1) + j) * 2 + slot];
}

double SphereFunction::equator_normal_derivative(const Vec3& w, int n, double step) const {
  auto at = [&](double s) {
    Vec3 q = std::cos(s) * w;
    q[n] += std::sin(s);
    return value(q);
  };
  return (-3.0 * at(0.0) + 4.0 * at(step) - at(2.0 * step)) / (2.0 * step);
}

namespace {

class PolynomialTrace final : public SphereFunction {
 public:
  PolynomialTrace(Polynomial p, int n) : p_(std::move(p)), n_(n) {}
  double value(const Vec3& w) const override {
    Vec3 u = w;
    u[n_] = std::abs(u[n_]);
    return p_(u);
  }
  Vec3 gradient(const Vec3& w) const override {
    Vec3 u = w;
    bool lower = u[n_] < 0.0;
    u[n_] = std::abs(u[n_]);
    Vec3 g = p_.gradient(u);
    double radial = dot(g, u);
    g = g - radial * u;
    if (lower) g[n_] = -g[n_];
    return g;
  }

 private:
  Polynomial p_;
  int n_;
};

class MeshFunction final : public SphereFunction {
 public:
  MeshFunction(GridPtr grid, Eigen::VectorXd values) : g_(std::move(grid)), v_(std::move(values)) {
    require(v_.size() == g_->size(), "mesh_function: value count does not match the grid");
    require(g_->has_operator(), "mesh_function: needs a uniform or octahedral grid");
  }
  double value(const Vec3& w) const override {
    if (g_->n == 1) {
      double f;
      int i = cell1(w, f);
      return (1.0 - f) * v_[i] + f * v_[(i + 1) % g_->size()];
    }
    int t = g_->locate(w);
    Eigen::Vector3d c = g_->triangle_inverse[t] * Eigen::Vector3d(w[0], w[1], w[2]);
    const auto& tri = g_->triangles[t];
    return (c[0] * v_[tri[0]] + c[1] * v_[tri[1]] + c[2] * v_[tri[2]]) / c.sum();
  }
  Vec3 gradient(const Vec3& w) const override {
    if (g_->n == 1) {
      double f;
      int i = cell1(w, f);
      double h = 2.0 * kPi / g_->size();
      double slope = (v_[(i + 1) % g_->size()] - v_[i]) / h;
      return {-slope * w[1], slope * w[0], 0.0};
    }
    int t = g_->locate(w);
    const auto& inv = g_->triangle_inverse[t];
    const auto& tri = g_->triangles[t];
    Eigen::Vector3d x(w[0], w[1], w[2]);
    Eigen::Vector3d c = inv * x;
    Eigen::Vector3d f(v_[tri[0]], v_[tri[1]], v_[tri[2]]);
    double s = c.sum(), fc = f.dot(c);
    Eigen::Vector3d gr = (inv.transpose() * f * s - inv.transpose() * Eigen::Vector3d::Ones() * fc) / (s * s);
    return {gr[0], gr[1], gr[2]};
  }

 private:
  int cell1(const Vec3& w, double& frac) const {
    const int N = g_->size();
    int i = g_->locate(w);
    double t = std::atan2(w[1], w[0]);
    if (t < 0) t += 2.0 * kPi;
    if (w[1] == 0.0) t = w[0] >= 0.0 ? 0.0 : kPi;
    frac = t / (2.0 * kPi) * N - i;
    return i;
  }
  GridPtr g_;
  Eigen::VectorXd v_;
};

class Combination final : public SphereFunction {
 public:
  explicit Combination(std::vector<std::pair<double, SphereFn>> t) : t_(std::move(t)) {}
  double value(const Vec3& w) const override {
    double s = 0.0;
    for (const auto& [a, f] : t_) s += a * f->value(w);
    return s;
  }
  Vec3 gradient(const Vec3& w) const override {
    Vec3 g{0, 0, 0};
    for (const auto& [a, f] : t_) g = g + a * f->gradient(w);
    return g;
  }
  double equator_normal_derivative(const Vec3& w, int n, double step) const override {
    double s = 0.0;
    for (const auto& [a, f] : t_) s += a * f->equator_normal_derivative(w, n, step);
    return s;
  }

 private:
  std::vector<std::pair<double, SphereFn>> t_;
};

class Constant final : public SphereFunction {
 public:
  explicit Constant(double c) : c_(c) {}
  double value(const Vec3&) const override { return c_; }
  Vec3 gradient(const Vec3&) const override { return {0, 0, 0}; }

 private:
  double c_;
};

class AngularTrace final : public SphereFunction {
 public:
  AngularTrace(std::function<double(double)> f, std::function<double(double)> df)
      : f_(std::move(f)), df_(std::move(df)) {}
  double value(const Vec3& w) const override { return f_(abs_angle(w)); }
  Vec3 gradient(const Vec3& w) const override {
    double d = df_(abs_angle(w));
    if (w[1] < 0.0) d = -d;
    return {-d * w[1], d * w[0], 0.0};
  }

 private:
  static double abs_angle(const Vec3& w) {
    if (w[1] == 0.0) return w[0] >= 0.0 ? 0.0 : kPi;
    return std::abs(std::atan2(w[1], w[0]));
  }
  std::function<double(double)> f_, df_;
};

}  // namespace

SphereFn polynomial_trace(const Polynomial& p, int n) { return std::make_shared<PolynomialTrace>(p, n); }
SphereFn mesh_function(GridPtr grid, Eigen::VectorXd values) {
  return std::make_shared<MeshFunction>(std::move(grid), std::move(values));
}
SphereFn combine(std::vector<std::pair<double, SphereFn>> terms) {
  return std::make_shared<Combination>(std::move(terms));
}
SphereFn constant_function(double c) { return std::make_shared<Constant>(c); }
SphereFn angular_trace(std::function<double(double)> f, std::function<double(double)> df) {
  return std::make_shared<AngularTrace>(std::move(f), std::move(df));
}

Eigen::VectorXd sample(const SphereFunction& f, const SphereGrid& grid) {
  Eigen::VectorXd v(grid.size());
  for (int i = 0; i < grid.size(); ++i) v[i] = f.value(grid.nodes[i]);
  return v;
}

double SphereQuadrature::integrate(const std::function<double(const Vec3&)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i]);
  return s;
}

double SphereQuadrature::integrate_equator(const std::function<double(const Vec3&)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < equator_points.size(); ++i) s += equator_weights[i] * f(equator_points[i]);
  return s;
}

double SphereQuadrature::inner(const SphereFunction& a, const SphereFunction& b) const {
  return integrate([&](const Vec3& w) { return a.value(w) * b.value(w); });
}

double SphereQuadrature::gradient_inner(const SphereFunction& a, const SphereFunction& b) const {
  return integrate([&](const Vec3& w) { return dot(a.gradient(w), b.gradient(w)); });
}

namespace {

void equator_arcs(SphereQuadrature& q, std::vector<double> angles, int order) {
  std::sort(angles.begin(), angles.end());
  Rule1D r = gauss_legendre(order, 0.0, 1.0);
  for (std::size_t k = 0; k < angles.size(); ++k) {
    double a = angles[k], b = k + 1 < angles.size() ? angles[k + 1] : angles[0] + 2.0 * kPi;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      double t = a + (b - a) * r.x[i];
      q.equator_points.push_back({std::cos(t), std::sin(t), 0.0});
      q.equator_weights.push_back((b - a) * r.w[i]);
    }
  }
}

void two_point_equator(SphereQuadrature& q) {
  q.equator_points = {{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}};
  q.equator_weights = {1.0, 1.0};
}

}  // namespace

SphereQuadrature cell_quadrature(const SphereGrid& grid, int order) {
  SphereQuadrature q;
  q.n = grid.n;
  if (grid.kind == GridKind::Uniform) {
    const int N = grid.resolution;
    const double h = 2.0 * kPi / N;
    Rule1D r = gauss_legendre(order, 0.0, 1.0);
    for (int i = 0; i < N / 2; ++i) {
      for (std::size_t k = 0; k < r.x.size(); ++k) {
        double t = h * (i + r.x[k]);
        q.points.push_back({std::cos(t), std::sin(t), 0.0});
        q.weights.push_back(2.0 * h * r.w[k]);
      }
    }
    two_point_equator(q);
    return q;
  }
  require(grid.kind == GridKind::Octahedral, "cell_quadrature: lat-long grids have no cells");
  const auto& rule = triangle_rule_deg5();
  for (const auto& t : grid.triangles) {
    const Vec3 &a = grid.nodes[t[0]], &b = grid.nodes[t[1]], &c = grid.nodes[t[2]];
    if (a[2] < 0 || b[2] < 0 || c[2] < 0) continue;
    Vec3 nrm = cross(b - a, c - a);
    double area2 = norm(nrm);
    double d = std::abs(dot(nrm, a)) / area2;
    for (std::size_t k = 0; k < rule.w.size(); ++k) {
      Vec3 y = rule.bary[k][0] * a + rule.bary[k][1] * b;
      y = y + rule.bary[k][2] * c;
      double r = norm(y);
      q.points.push_back({y[0] / r, y[1] / r, y[2] / r});
      q.weights.push_back(2.0 * rule.w[k] * 0.5 * area2 * d / (r * r * r));
    }
  }
  std::vector<double> angles;
  for (int e : grid.equator) angles.push_back(std::atan2(grid.nodes[e][1], grid.nodes[e][0]));
  equator_arcs(q, angles, order);
  return q;
}

const SphereQuadrature& default_quadrature(int n) {
  require(n == 1 || n == 2, "default_quadrature: unsupported dimension");
  static const SphereQuadrature q1 = cell_quadrature(*build_grid(1, 720), 8);
  static const SphereQuadrature q2 = cell_quadrature(*build_grid(2, 128), 8);
  return n == 1 ? q1 : q2;
}

SphereQuadrature node_quadrature(const SphereGrid& grid) {
  SphereQuadrature q;
  q.n = grid.n;
  for (int i : grid.upper) {
    q.points.push_back(grid.nodes[i]);
    q.weights.push_back(grid.is_equator(i) ? grid.weights[i] : 2.0 * grid.weights[i]);
  }
  if (grid.n == 1) {
    two_point_equator(q);
    return q;
  }
  std::vector<std::pair<double, int>> eq;
  for (int e : grid.equator) eq.emplace_back(std::atan2(grid.nodes[e][1], grid.nodes[e][0]), e);
  std::sort(eq.begin(), eq.end());
  const std::size_t m = eq.size();
  for (std::size_t k = 0; k < m; ++k) {
    double prev = eq[(k + m - 1) % m].first, next = eq[(k + 1) % m].first;
    double gap = std::remainder(next - prev, 2.0 * kPi);
    if (gap <= 0) gap += 2.0 * kPi;
    q.equator_points.push_back(grid.nodes[eq[k].second]);
    q.equator_weights.push_back(0.5 * gap);
  }
  return q;
}

double sphere_monomial_integral(int n, const Exponent& e) {
  const int d = n + 1;
  double sum_beta = 0.0, log_num = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (i >= d) {
      require(e[i] == 0, "sphere_monomial_integral: exponent on a missing variable");
      continue;
    }
    if (e[i] % 2 != 0) return 0.0;
    double beta = 0.5 * (e[i] + 1);
    sum_beta += beta;
    log_num += std::lgamma(beta);
  }
  return 2.0 * std::exp(log_num - std::lgamma(sum_beta));
}

double sphere_polynomial_integral(int n, const Polynomial& p) {
  double s = 0.0;
  for (const auto& [e, c] : p.terms()) s += c * sphere_monomial_integral(n, e);
  return s;
}

}  // namespace thin_epi

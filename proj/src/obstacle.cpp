#include "thin_epi/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thin_epi {

double ProblemSpec::obstacle_at(const Vec3& x) const {
  Vec3 y = x;
  y[n] = 0.0;
  if (obstacle_polynomial) return (*obstacle_polynomial)(y);
  if (obstacle) return obstacle(y);
  return 0.0;
}

void validate(const ProblemSpec& spec) {
  require(spec.n == 1 || spec.n == 2, "ProblemSpec: n must be 1 or 2");
  require(spec.N >= 16, "ProblemSpec: at least 32 grid cells per diameter required");
  require(spec.boundary != nullptr || static_cast<bool>(spec.boundary_extension), "ProblemSpec: missing boundary data");
  require(spec.k >= 2, "ProblemSpec: k must be at least 2");
  require(spec.gamma > 0.0 && spec.gamma < 1.0, "ProblemSpec: gamma must lie in (0, 1)");
  require(spec.omega > 0.0 && spec.omega < 2.0, "ProblemSpec: omega must lie in (0, 2)");
  require(spec.tol > 0.0 && spec.max_sweeps > 0, "ProblemSpec: invalid stopping rule");
  if (spec.obstacle_polynomial)
    require(spec.obstacle_polynomial->max_power(spec.n) == 0, "ProblemSpec: obstacle must not depend on x_{n+1}");
  if (spec.boundary) {
    const SphereQuadrature& q = default_quadrature(spec.n);
    for (std::size_t k = 0; k < q.points.size(); k += 7) {
      const Vec3& w = q.points[k];
      double a = spec.boundary->value(w), b = spec.boundary->value(reflect(w, spec.n));
      if (std::abs(a - b) > 1e-10 * std::max(1.0, std::abs(a)))
        fail(ErrorCode::InvalidArgument, "ProblemSpec: boundary data is not even in x_{n+1}");
    }
  }
}

int GridSolution::index(const std::array<int, 3>& ia) const {
  const int W = width();
  if (n == 1) return ia[1] * W + (ia[0] + N);
  return (ia[2] * W + (ia[1] + N)) * W + (ia[0] + N);
}

Vec3 GridSolution::position(int idx) const {
  const int W = width();
  Vec3 x{0, 0, 0};
  x[0] = (idx % W - N) * h;
  if (n == 1) {
    x[1] = (idx / W) * h;
  } else {
    x[1] = ((idx / W) % W - N) * h;
    x[2] = (idx / (W * W)) * h;
  }
  return x;
}

namespace {

// Cell lookup along one axis; in-plane axes span [-N, N], the normal axis [0, N].
void locate_axis(double coord, double h, int lo, int hi, int& i0, double& t) {
  double s = coord / h;
  int i = static_cast<int>(std::floor(s));
  i = std::clamp(i, lo, hi - 1);
  i0 = i;
  t = s - i;
}

}  // namespace

double GridSolution::value(const Vec3& x) const {
  Vec3 y = x;
  y[n] = std::abs(y[n]);
  const int d = n + 1;
  std::array<int, 3> i0{0, 0, 0};
  std::array<double, 3> t{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    if (a < n)
      locate_axis(y[a], h, -N, N, i0[a], t[a]);
    else
      locate_axis(y[a], h, 0, N, i0[a], t[a]);
  }
  double s = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    std::array<int, 3> ia = i0;
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      int bit = (corner >> a) & 1;
      ia[a] += bit;
      w *= bit ? t[a] : 1.0 - t[a];
    }
    if (w != 0.0) s += w * u[index(ia)];
  }
  return s;
}

Vec3 GridSolution::gradient(const Vec3& x) const {
  Vec3 y = x;
  double sign = y[n] < 0.0 ? -1.0 : 1.0;
  y[n] = std::abs(y[n]);
  const int d = n + 1;
  std::array<int, 3> i0{0, 0, 0};
  std::array<double, 3> t{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    if (a < n)
      locate_axis(y[a], h, -N, N, i0[a], t[a]);
    else
      locate_axis(y[a], h, 0, N, i0[a], t[a]);
  }
  Vec3 g{0, 0, 0};
  for (int corner = 0; corner < (1 << d); ++corner) {
    std::array<int, 3> ia = i0;
    for (int a = 0; a < d; ++a) ia[a] += (corner >> a) & 1;
    double val = u[index(ia)];
    for (int a = 0; a < d; ++a) {
      double w = 1.0;
      for (int b = 0; b < d; ++b) {
        int bit = (corner >> b) & 1;
        if (b == a)
          w *= (bit ? 1.0 : -1.0) / h;
        else
          w *= bit ? t[b] : 1.0 - t[b];
      }
      g[a] += w * val;
    }
  }
  g[n] *= sign;
  return g;
}

BallFunction GridSolution::as_ball_function() const {
  auto self = std::make_shared<const GridSolution>(*this);
  return BallFunction::callable(
      n, [self](const Vec3& x) { return self->value(x); }, [self](const Vec3& x) { return self->gradient(x); });
}

namespace {

struct Layout {
  std::vector<int> active;      // interior and thin nodes in sweep order
  std::vector<int> neighbors;   // 2(n+1) per active node, reflection applied
  std::vector<double> rhs;      // h^2 f per active node
  std::vector<double> floor;    // obstacle per active node, -inf off the plane
  std::vector<char> is_thin;
};

double boundary_value(const ProblemSpec& spec, const Vec3& x, bool at_node) {
  if (at_node && spec.boundary_extension) return spec.boundary_extension(x);
  double r = norm(x);
  if (!spec.boundary) return spec.boundary_extension((1.0 / r) * x);
  return spec.boundary->value((1.0 / r) * x);
}

GridSolution layout_grid(const ProblemSpec& spec, Layout& L) {
  GridSolution s;
  s.n = spec.n;
  s.N = spec.N;
  s.h = spec.h();
  const int n = spec.n, d = n + 1, N = spec.N, W = s.width();
  const int total = (n == 1 ? W : W * W) * (N + 1);
  s.u.assign(total, 0.0);
  s.type.assign(total, NodeType::Outside);
  s.obstacle.assign(total, std::numeric_limits<double>::quiet_NaN());

  auto inside = [&](const std::array<int, 3>& ia) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += double(ia[a]) * ia[a];
    return r2 <= double(N) * N * (1.0 + 1e-12);
  };
  auto coords = [&](int idx) {
    std::array<int, 3> ia{0, 0, 0};
    ia[0] = idx % W - N;
    if (n == 1) {
      ia[1] = idx / W;
    } else {
      ia[1] = (idx / W) % W - N;
      ia[2] = idx / (W * W);
    }
    return ia;
  };

  for (int idx = 0; idx < total; ++idx) {
    auto ia = coords(idx);
    Vec3 x = s.position(idx);
    if (!inside(ia)) {
      s.type[idx] = NodeType::Outside;
      s.u[idx] = norm(x) > 0.0 ? boundary_value(spec, x, false) : 0.0;
      continue;
    }
    bool interior = true;
    for (int a = 0; a < d && interior; ++a)
      for (int sgn : {-1, 1}) {
        auto nb = ia;
        nb[a] += sgn;
        if (a == n && nb[a] < 0) nb[a] = -nb[a];
        if (!inside(nb)) interior = false;
      }
    if (!interior) {
      s.type[idx] = NodeType::Boundary;
      s.u[idx] = boundary_value(spec, x, true);
      if (ia[n] == 0) s.obstacle[idx] = spec.obstacle_at(x);
      continue;
    }
    s.type[idx] = ia[n] == 0 ? NodeType::Thin : NodeType::Interior;
    L.active.push_back(idx);
    L.is_thin.push_back(ia[n] == 0);
    L.rhs.push_back(spec.rhs ? s.h * s.h * spec.rhs(x) : 0.0);
    if (ia[n] == 0) {
      double phi = spec.obstacle_at(x);
      s.obstacle[idx] = phi;
      L.floor.push_back(phi);
      s.thin_nodes.push_back(idx);
    } else {
      L.floor.push_back(-std::numeric_limits<double>::infinity());
    }
    for (int a = 0; a < d; ++a)
      for (int sgn : {-1, 1}) {
        auto nb = ia;
        nb[a] += sgn;
        if (a == n && nb[a] < 0) nb[a] = -nb[a];
        L.neighbors.push_back(s.index(nb));
      }
  }
  return s;
}

// Dirichlet energy of the even extension plus the source term, up to a
// constant from fixed-fixed edges.
double discrete_energy(const GridSolution& s, const Layout& L) {
  const int d = s.n + 1;
  double e = 0.0;
  for (std::size_t a = 0; a < L.active.size(); ++a) {
    int c = L.active[a];
    double uc = s.u[c];
    for (int k = 0; k < 2 * d; ++k) {
      int nb = L.neighbors[a * 2 * d + k];
      bool nb_active = s.type[nb] == NodeType::Interior || s.type[nb] == NodeType::Thin;
      // Each active-active edge is met twice.
      double share = nb_active ? 0.5 : 1.0;
      double diff = uc - s.u[nb];
      e += share * 0.5 * diff * diff * (L.is_thin[a] ? 1.0 : 2.0);
    }
    e += L.rhs[a] * uc * (L.is_thin[a] ? 1.0 : 2.0);
  }
  return e;
}

}  // namespace

GridSolution solve_thin_obstacle(const ProblemSpec& spec) {
  validate(spec);
  Layout L;
  GridSolution s = layout_grid(spec, L);
  const int d = spec.n + 1;
  const std::size_t na = L.active.size();

  if (spec.warm_start && spec.N % 2 == 0 && spec.N / 2 >= 16) {
    ProblemSpec coarse = spec;
    coarse.N = spec.N / 2;
    coarse.energy_stride = 0;
    GridSolution c = solve_thin_obstacle(coarse);
    for (std::size_t a = 0; a < na; ++a) s.u[L.active[a]] = c.value(s.position(L.active[a]));
  }
  for (std::size_t a = 0; a < na; ++a) s.u[L.active[a]] = std::max(s.u[L.active[a]], L.floor[a]);

  const double inv = 1.0 / (2.0 * d), omega = spec.omega;
  for (long sweep = 0; sweep < spec.max_sweeps; ++sweep) {
    double maxupd = 0.0;
    const int* nb = L.neighbors.data();
    for (std::size_t a = 0; a < na; ++a, nb += 2 * d) {
      int c = L.active[a];
      double sum = 0.0;
      for (int k = 0; k < 2 * d; ++k) sum += s.u[nb[k]];
      double gs = (sum - L.rhs[a]) * inv;
      double old = s.u[c];
      double y = std::max(old + omega * (gs - old), L.floor[a]);
      maxupd = std::max(maxupd, std::abs(y - old));
      s.u[c] = y;
    }
    s.sweeps = sweep + 1;
    s.last_update = maxupd;
    if (spec.energy_stride > 0 && s.sweeps % spec.energy_stride == 0) s.energy_history.push_back(discrete_energy(s, L));
    if (maxupd <= spec.tol) {
      s.converged = true;
      break;
    }
  }

  s.contact_tol = spec.contact_tolerance();
  s.contact.assign(s.thin_nodes.size(), 0);
  s.min_gap = std::numeric_limits<double>::infinity();
  const int* nb = L.neighbors.data();
  for (std::size_t a = 0; a < na; ++a, nb += 2 * d) {
    int c = L.active[a];
    double sum = 0.0;
    for (int k = 0; k < 2 * d; ++k) sum += s.u[nb[k]];
    double r = (sum - 2.0 * d * s.u[c] - L.rhs[a]) * inv;
    if (L.is_thin[a]) {
      double gap = s.u[c] - L.floor[a];
      s.min_gap = std::min(s.min_gap, gap);
      s.complementarity_residual = std::max(s.complementarity_residual, std::abs(std::min(gap, -r)));
    } else {
      s.laplace_residual = std::max(s.laplace_residual, std::abs(r));
    }
  }
  if (s.thin_nodes.empty()) s.min_gap = 0.0;
  for (std::size_t t = 0; t < s.thin_nodes.size(); ++t) {
    int c = s.thin_nodes[t];
    s.contact[t] = s.u[c] - s.obstacle[c] <= spec.contact_tolerance();
  }
  if (!s.converged)
    fail(ErrorCode::NotConverged, "solve_thin_obstacle: no convergence after " + std::to_string(s.sweeps) +
                                      " sweeps, last update " + std::to_string(s.last_update));
  return s;
}

ContactSet contact_set(const GridSolution& sol, double tol) {
  if (tol <= 0.0) tol = sol.contact_tol;
  ContactSet cs;
  const int n = sol.n;
  std::vector<int> pos(sol.u.size(), -1);
  for (std::size_t t = 0; t < sol.thin_nodes.size(); ++t) pos[sol.thin_nodes[t]] = static_cast<int>(t);
  cs.mask.assign(sol.thin_nodes.size(), 0);
  for (std::size_t t = 0; t < sol.thin_nodes.size(); ++t) {
    int c = sol.thin_nodes[t];
    cs.mask[t] = sol.u[c] - sol.obstacle[c] <= tol;
  }
  for (std::size_t t = 0; t < sol.thin_nodes.size(); ++t) {
    if (!cs.mask[t]) continue;
    int c = sol.thin_nodes[t];
    Vec3 x = sol.position(c);
    cs.contact.push_back(x);
    std::array<int, 3> ia{0, 0, 0};
    for (int a = 0; a < n; ++a) ia[a] = static_cast<int>(std::lround(x[a] / sol.h));
    bool edge = false;
    for (int a = 0; a < n && !edge; ++a)
      for (int sgn : {-1, 1}) {
        auto nb = ia;
        nb[a] += sgn;
        if (std::abs(nb[a]) > sol.N) continue;
        int q = pos[sol.index(nb)];
        if (q >= 0 && !cs.mask[q]) edge = true;
      }
    if (edge) cs.free_boundary.push_back(x);
  }
  return cs;
}

Polynomial harmonic_extension(const Polynomial& q, int n) {
  require(q.max_power(n) == 0, "harmonic_extension: q must not depend on x_{n+1}");
  Polynomial out, lap = q, z2 = Polynomial::variable(n) * Polynomial::variable(n), zpow = Polynomial::constant(1.0);
  double fact = 1.0, sign = 1.0;
  for (int j = 0; !lap.is_zero(); ++j) {
    out += lap * zpow * (sign / fact);
    lap = lap.laplacian(n);
    zpow = zpow * z2;
    fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    sign = -sign;
  }
  return out;
}

Reduction reduce_to_zero_obstacle(const GridSolution& u, const ProblemSpec& spec, const Vec3& x0) {
  if (!spec.obstacle_polynomial)
    fail(ErrorCode::Precondition, "reduce_to_zero_obstacle: Taylor data of the obstacle unavailable");
  require(std::abs(x0[spec.n]) == 0.0, "reduce_to_zero_obstacle: x0 must lie on the thin set");
  const int n = spec.n;
  Reduction r;
  r.x0 = x0;
  const Polynomial phi = *spec.obstacle_polynomial;
  r.q = phi.taylor(x0, spec.k);
  r.q_tilde = harmonic_extension(r.q, n);
  r.harmonic_residual = r.q_tilde.laplacian(n + 1).max_abs_coefficient();
  r.h_polynomial = (phi - r.q).laplacian(n) * -1.0;

  auto sol = std::make_shared<const GridSolution>(u);
  Polynomial q = r.q, qt = r.q_tilde, hp = r.h_polynomial;
  r.v = [sol, phi, q, qt, n](const Vec3& x) {
    Vec3 y = x;
    y[n] = 0.0;
    return sol->value(x) - phi(y) + q(y) - qt(x);
  };
  r.h = [hp, n](const Vec3& x) {
    Vec3 y = x;
    y[n] = 0.0;
    return hp(y);
  };

  const double expo = spec.k + spec.gamma - 2.0;
  r.min_v_thin = std::numeric_limits<double>::infinity();
  for (int c : u.thin_nodes) {
    Vec3 x = u.position(c);
    r.min_v_thin = std::min(r.min_v_thin, r.v(x));
    double dist = norm(x - x0);
    if (dist > 0.5 * u.h) r.h_constant = std::max(r.h_constant, std::abs(r.h(x)) / std::pow(dist, expo));
  }
  if (u.thin_nodes.empty()) r.min_v_thin = 0.0;
  return r;
}

}  // namespace thin_epi

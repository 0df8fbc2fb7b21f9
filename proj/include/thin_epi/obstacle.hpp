#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thin_epi/polynomial.hpp"
#include "thin_epi/sphere.hpp"
#include "thin_epi/weiss.hpp"

namespace thin_epi {

using Field = std::function<double(const Vec3&)>;

// Thin obstacle problem on B_1 in R^{n+1}: Delta u = f off the contact set,
// u >= phi on {x_{n+1} = 0}, u even in x_{n+1}, u = g on the sphere.
struct ProblemSpec {
  int n = 1;
  int N = 64;  // grid nodes per unit length, h = 1/N
  std::optional<Polynomial> obstacle_polynomial;  // in x' (takes precedence)
  Field obstacle;                                  // sampled on the thin set
  SphereFn boundary;
  // When set, boundary nodes take this value at the node itself instead of
  // g at the nearest sphere point.
  Field boundary_extension;
  Field rhs;
  int k = 2;
  double gamma = 0.5;

  double omega = 1.8;
  double tol = 1e-10;
  long max_sweeps = 200000;
  bool warm_start = true;
  int energy_stride = 10;

  double h() const { return 1.0 / N; }
  double contact_tolerance() const { return 10.0 * tol; }
  double obstacle_at(const Vec3& x) const;
};

void validate(const ProblemSpec& spec);

enum class NodeType : char { Outside, Boundary, Interior, Thin };

struct GridSolution {
  int n = 1;
  int N = 0;
  double h = 0;
  // Node (i_1, .., i_n, l) with i_a in [-N, N] and l in [0, N]; x_a = i_a h,
  // x_{n+1} = l h.
  std::vector<double> u;
  std::vector<NodeType> type;
  std::vector<double> obstacle;  // thin nodes only, NaN elsewhere
  std::vector<int> thin_nodes;   // thin-plane nodes inside the domain
  std::vector<char> contact;     // per entry of thin_nodes

  double laplace_residual = 0;
  double complementarity_residual = 0;
  double min_gap = 0;  // min(u - phi) over thin nodes
  double contact_tol = 1e-9;
  double last_update = 0;
  long sweeps = 0;
  bool converged = false;
  std::vector<double> energy_history;  // every energy_stride sweeps

  int width() const { return 2 * N + 1; }
  int index(const std::array<int, 3>& ia) const;  // (i_1, .., l) with l >= 0
  Vec3 position(int idx) const;
  // Multilinear interpolation of the even extension; valid on the whole box.
  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  BallFunction as_ball_function() const;
};

GridSolution solve_thin_obstacle(const ProblemSpec& spec);

struct ContactSet {
  std::vector<char> mask;        // per thin node
  std::vector<Vec3> contact;     // positions in contact
  std::vector<Vec3> free_boundary;
};

// tol <= 0 uses the tolerance the solution was computed with.
ContactSet contact_set(const GridSolution& sol, double tol);

// Zero-obstacle reduction at x0 on the thin set:
//   v = u - phi + q - q~,  h = -Delta'(phi - q),
// q the degree-k Taylor polynomial of phi at x0 and q~ its even harmonic
// extension.
struct Reduction {
  Vec3 x0{0, 0, 0};
  Polynomial q, q_tilde;
  Polynomial h_polynomial;
  Field v, h;
  double harmonic_residual = 0;   // max coefficient of Delta q~
  double h_constant = 0;          // max |h(x)| / |x - x0|^{k+gamma-2} on samples
  double min_v_thin = 0;          // min of v at thin nodes
};

Reduction reduce_to_zero_obstacle(const GridSolution& u, const ProblemSpec& spec, const Vec3& x0);

// Even harmonic extension of a polynomial in x' (no x_{n+1} dependence).
Polynomial harmonic_extension(const Polynomial& q, int n);

}  // namespace thin_epi

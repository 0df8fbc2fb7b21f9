#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <vector>

#include "thin_epi/core.hpp"
#include "thin_epi/polynomial.hpp"

namespace thin_epi {

enum class GridKind {
  Uniform,     // S^1, equally spaced angles
  Octahedral,  // S^2, subdivided octahedron projected to the sphere
  LatLong,     // S^2, Gauss-Radau latitude rings times uniform azimuth
};

// Nodes and quadrature weights on S^n, mirror symmetric in x_{n+1}.
//
// Uniform and Octahedral grids also carry the discrete Laplace-Beltrami
// operator assembled on the closed upper half: `stiffness` and `mass` act on
// the nodes listed in `upper`, and for an even function u the full-sphere
// Dirichlet energy and L2 mass are 2 u^T K u and 2 u^T M u.
struct SphereGrid {
  int n = 1;
  GridKind kind = GridKind::Uniform;
  int resolution = 0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  std::vector<int> equator;
  std::vector<int> reflection;

  std::vector<int> upper;      // nodes with x_{n+1} >= 0, ascending
  std::vector<int> upper_pos;  // node -> index into `upper`, or -1
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;

  // Octahedral only.
  int subdivisions = 0;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Eigen::Matrix3d> triangle_inverse;  // inverse of [v0 v1 v2]
  std::vector<int> locate_table;                  // (octant, i, j, up/down) -> triangle

  int size() const { return static_cast<int>(nodes.size()); }
  bool has_operator() const { return kind != GridKind::LatLong; }
  bool is_equator(int i) const { return nodes[i][n] == 0.0; }

  double integrate(const Eigen::VectorXd& values) const;
  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  // Full-sphere discrete Dirichlet energy of an even node vector.
  double dirichlet_energy(const Eigen::VectorXd& values) const;
  // Discrete Dirichlet form between two even node vectors.
  double dirichlet_form(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  // Index of the cell containing direction w (triangle for S^2, interval for
  // S^1). Points on the equator resolve to the upper cell.
  int locate(const Vec3& w) const;
  // Reflect node values from the upper half to the full sphere.
  Eigen::VectorXd extend_even(const Eigen::VectorXd& upper_values) const;
  Eigen::VectorXd restrict_upper(const Eigen::VectorXd& values) const;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

// resolution: number of nodes around the equator for Uniform and Octahedral
// grids (a multiple of 4 for Octahedral); azimuthal count for LatLong.
GridPtr build_grid(int n, int resolution);
GridPtr build_grid(int n, int resolution, GridKind kind);

// Function on S^n. Gradients are tangential; on the equator they are the
// limit taken from the side x_{n+1} > 0.
class SphereFunction {
 public:
  virtual ~SphereFunction() = default;
  virtual double value(const Vec3& w) const = 0;
  virtual Vec3 gradient(const Vec3& w) const = 0;
  // One-sided derivative at an equator point along the meridian toward
  // +x_{n+1}, by a second-order difference.
  virtual double equator_normal_derivative(const Vec3& w, int n, double step = 1e-5) const;
};

using SphereFn = std::shared_ptr<const SphereFunction>;

// w -> P(w*) where w* has |w_{n+1}| in the last slot. For P odd in x_{n+1}
// this is the even reflection of sign(x_{n+1}) P.
SphereFn polynomial_trace(const Polynomial& p, int n);
// P1 interpolation of node values.
SphereFn mesh_function(GridPtr grid, Eigen::VectorXd values);
SphereFn combine(std::vector<std::pair<double, SphereFn>> terms);
SphereFn constant_function(double c);
// n = 1 only: w -> f(|theta|) with theta in (-pi, pi].
SphereFn angular_trace(std::function<double(double)> f, std::function<double(double)> df);

Eigen::VectorXd sample(const SphereFunction& f, const SphereGrid& grid);

// Points covering the closed upper half-sphere with weights doubled so that
// sums integrate even functions over all of S^n, plus a rule for the
// equator (two unit-weight points when n = 1).
struct SphereQuadrature {
  int n = 1;
  std::vector<Vec3> points;
  std::vector<double> weights;
  std::vector<Vec3> equator_points;
  std::vector<double> equator_weights;

  double integrate(const std::function<double(const Vec3&)>& f) const;
  double integrate_equator(const std::function<double(const Vec3&)>& f) const;
  double inner(const SphereFunction& a, const SphereFunction& b) const;
  double gradient_inner(const SphereFunction& a, const SphereFunction& b) const;
};

// Cell-aligned rule for a Uniform or Octahedral grid (exact cell boundaries,
// so P1 traces and kinks along the equator are integrated without loss).
SphereQuadrature cell_quadrature(const SphereGrid& grid, int order = 8);
// Default high-accuracy rule for smooth-by-hemisphere integrands.
const SphereQuadrature& default_quadrature(int n);
// Plain node rule of any grid.
SphereQuadrature node_quadrature(const SphereGrid& grid);

// Exact integral over S^n of the monomial with the given exponents
// (variables beyond n+1 must have zero exponent).
double sphere_monomial_integral(int n, const Exponent& e);
// Exact integral over S^n of a polynomial.
double sphere_polynomial_integral(int n, const Polynomial& p);

}  // namespace thin_epi

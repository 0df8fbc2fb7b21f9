#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "thin_epi/polynomial.hpp"
#include "thin_epi/sphere.hpp"

namespace thin_epi {

// One flag per entry of SphereGrid::equator; set entries carry a Dirichlet
// condition.
using EquatorMask = std::vector<char>;

EquatorMask empty_mask(const SphereGrid& grid);
EquatorMask full_mask(const SphereGrid& grid);
std::string mask_hash(const EquatorMask& mask);

// Ordered eigenpairs of -Laplace-Beltrami on even functions of S^n that
// vanish on a masked subset of the equator. Modes are stored as full-sphere
// node values with unit L2 norm.
//
// Exact bases (half_sphere_basis) additionally keep the odd harmonic
// polynomial behind every mode and its homogeneity degree.
struct EigenBasis {
  GridPtr grid;
  EquatorMask mask;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd modes;
  bool even = true;

  std::vector<int> degrees;
  std::vector<Polynomial> harmonics;

  int count() const { return static_cast<int>(eigenvalues.size()); }
  bool is_exact() const { return !harmonics.empty(); }
  // Analytic trace for exact bases, P1 interpolant otherwise.
  SphereFn mode(int j) const;
  // Coefficients of node values against the modes (grid quadrature).
  Eigen::VectorXd project(const Eigen::VectorXd& values) const;
};

using BasisPtr = std::shared_ptr<const EigenBasis>;

struct EigenOptions {
  std::string cache_dir;  // empty: THIN_EPI_CACHE if set, else no cache
  double tol = 1e-10;
  int dense_limit = 600;
  int max_iterations = 2000;
};

BasisPtr eigenbasis(GridPtr grid, const EquatorMask& mask, int count, const EigenOptions& opts = {});

// Multiplicity of the half-sphere eigenvalue lambda(j).
int half_sphere_multiplicity(int n, int j);
// Number of half-sphere modes of homogeneity at most 2m+1.
int mode_count_ell(int n, int m);

// Orthonormal basis (as even traces) of the degree-j harmonic polynomials on
// R^{n+1} that are odd in x_{n+1}.
std::vector<Polynomial> odd_harmonics(int n, int j);

// Exact half-sphere basis up to max_degree. With `lead`, the block of
// degree deg(lead) is rotated so that its last mode is lead/||lead||.
BasisPtr half_sphere_basis(int n, int max_degree, GridPtr grid = nullptr, const Polynomial* lead = nullptr);

// L2(S^n) norm of the even trace of a polynomial odd or even in x_{n+1}.
double trace_norm(int n, const Polynomial& p);

// Trace on S^n: node values plus optional coefficients in a basis.
struct SphericalTrace {
  GridPtr grid;
  Eigen::VectorXd values;
  BasisPtr basis;
  Eigen::VectorXd coefficients;

  bool has_coefficients() const { return basis != nullptr && coefficients.size() > 0; }
  SphereFn function() const;
};

SphericalTrace trace_from_coefficients(BasisPtr basis, const Eigen::VectorXd& coefficients);
SphericalTrace trace_from_function(GridPtr grid, const SphereFunction& f);

}  // namespace thin_epi

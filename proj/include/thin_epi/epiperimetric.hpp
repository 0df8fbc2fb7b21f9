#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "thin_epi/catalog.hpp"
#include "thin_epi/spectral.hpp"
#include "thin_epi/weiss.hpp"

namespace thin_epi {

enum class BasisMode {
  Auto,      // exact half-sphere basis when Z_delta covers the whole equator
  Discrete,  // always the mesh eigenbasis
};

struct EpiConfig {
  double eps = 0.1;
  double eta = 0.05;
  std::vector<double> delta_ladder{0.4, 0.2, 0.1, 0.05};
  double condition_threshold = 1e6;
  BasisMode basis_mode = BasisMode::Auto;
  int extra_modes = 8;    // discrete modes kept beyond index ell
  int extra_degrees = 4;  // exact basis reaches degree 2m+1+extra_degrees
  double fd_step = 1e-5;
  bool quadrature_path = true;
  EigenOptions eigen;
};

// Everything fixed by (p, grid, config): delta, the Dirichlet eigenbasis on
// Z_delta and the exact half-sphere basis whose mode ell is p itself.
struct EpiContext {
  BlowupProfile p;
  int m = 0, n = 1, ell = 1;
  double delta = 0;
  GridPtr grid;
  EquatorMask mask;
  BasisPtr half;
  BasisPtr delta_basis;
  std::shared_ptr<const SphereQuadrature> quad;
  Eigen::VectorXd p_values;
  double rule_threshold = 0;  // lambda(2m+2) - 1
  std::vector<std::string> log;

  double mu() const { return 2.0 * m + 1.0; }
  bool exact() const { return delta_basis->is_exact(); }
};

EpiContext choose_delta(const BlowupProfile& p, GridPtr grid, const EpiConfig& cfg = {});

struct Decomposition {
  Eigen::VectorXd nu;                 // P = sum_{j<=ell} nu_j phi_j
  Eigen::VectorXd phi;                // residual node values
  Eigen::VectorXd phi_coefficients;   // residual in the delta basis
  double delta = 0;
  double condition = 1;
  double reconstruction_error = 0;
  double moment_residual = 0;
  double zero_set_residual = 0;
  double distance_to_p = 0;           // ||c - p||_{L2}
  // phi is exactly sum phi_coefficients_j phi_j^delta (exact basis and a
  // trace given by coefficients in it).
  bool exact_residual = false;
};

Decomposition decompose_trace(const SphericalTrace& c, const EpiContext& ctx, const EpiConfig& cfg = {});

struct Admissibility {
  bool even = false;
  bool nonnegative_on_thin_set = false;
  bool matches_trace = false;
  bool ok() const { return even && nonnegative_on_thin_set && matches_trace; }
};

struct EpiReport {
  bool negative_case = false;
  double mu = 0;
  double w_z = 0;
  double w_zeta = 0;
  double bound = 0;
  double slack = 0;
  double kappa = 0;
  double alpha = 0;
  double delta = 0;
  double distance_to_p = 0;
  double condition = 1;
  double w_z_quad = 0, w_zeta_quad = 0;
  double discrepancy = 0;  // max deviation of the quadrature path
  double cancellation = 0; // mixed-term combination that must vanish
  bool eps_gate = false;
  bool eta_gate = true;
  bool violation = false;  // slack < -1e-8
  Admissibility zeta;
};

BallFunction build_competitor_positive(const Decomposition& dec, const EpiContext& ctx);
EpiReport verify_epi(const SphericalTrace& c, const EpiContext& ctx, const EpiConfig& cfg = {});

// Root of (mu - alpha)/(n + alpha + mu - 1) = w in (2m, 2m+1) by bisection.
double solve_alpha_negative(double w, int n, int m, double tol = 1e-12);

struct NegativeResult {
  BallFunction zeta;
  EpiReport report;
  double phi_norm2 = 0;   // ||c - h||^2
  double norm_bound = 0;  // (n+2mu-1)/(n+mu+alpha-1)^2
};

NegativeResult build_competitor_negative(const SphericalTrace& c, const EpiContext& ctx, const EpiConfig& cfg = {});

// Admissible random traces: p plus a perturbation on modes beyond ell.
SphericalTrace random_positive_trace(const EpiContext& ctx, const EpiConfig& cfg, std::mt19937_64& rng);
// p plus lower modes dominating a small higher-mode part, with W(z) in
// (-eta, 0) and ||c - p|| <= eps.
SphericalTrace random_negative_trace(const EpiContext& ctx, const EpiConfig& cfg, std::mt19937_64& rng);

struct OffDegreeReport {
  double mu = 0, t = 0, norm2 = 0;
  // W_mu(r^{mu+t} c) against t ||c||^2.
  double shifted_exact = 0, shifted_quad = 0, shifted_rhs = 0;
  // W_mu(r^mu c) against (1 + t/(n+2mu-1)) W_mu(r^{mu+t} c).
  double base_exact = 0, base_quad = 0, base_rhs_exact = 0, base_rhs_quad = 0;
  double discrepancy_exact = 0, discrepancy_quad = 0;  // relative to ||c||^2
};

// c is the trace of a (mu+t)-homogeneous solution.
OffDegreeReport weiss_of_offdegree(int n, const SphereFn& c, double mu, double t, const WeissOptions& opts = {});
OffDegreeReport weiss_of_offdegree(const HalfspaceSolution2D& sol, double mu, const WeissOptions& opts = {});

struct GapRow {
  double t = 0;
  std::string branch;  // "negative" or "positive"
  double lhs = 0;      // (1-(1+Ct)t)(1+Ct) or (1-kappa)(1+Ct)
  double required = 1; // lhs <= 1 (negative) / lhs >= 1 (positive)
  double first_order = 0;
  bool contradiction = false;
};

struct GapReport {
  int m = 0, n = 1;
  double C = 0, kappa = 0;
  std::vector<GapRow> rows;
  bool all_contradict = true;
  // n = 1: members of A_1 inside (mu - below, mu) U (mu, mu + above).
  std::vector<double> a1_in_window;
  double a1_nearest_below = 0, a1_nearest_above = 0;
};

GapReport gap_demo(int m, int n, const std::vector<double>& t_grid, double below = 0.1, double above = 0.4);
std::vector<double> a1_members(double upper);

}  // namespace thin_epi

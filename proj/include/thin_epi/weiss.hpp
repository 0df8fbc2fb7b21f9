#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "thin_epi/spectral.hpp"

namespace thin_epi {

struct HomogeneousTerm {
  double degree;
  SphereFn trace;
};

// Function on the unit ball of R^{n+1}, even in x_{n+1}. Either a finite sum
// of homogeneous terms r^a c(w) or a general callable.
class BallFunction {
 public:
  using Field = std::function<double(const Vec3&)>;
  using GradField = std::function<Vec3(const Vec3&)>;

  static BallFunction homogeneous(int n, double degree, SphereFn trace);
  static BallFunction sum(int n, std::vector<HomogeneousTerm> terms);
  // Without `grad`, gradients use central differences with step
  // fd_step (absolute) or 1e-6 |x| when fd_step is zero.
  static BallFunction callable(int n, Field f, GradField grad = {}, double fd_step = 0.0);

  int n() const { return n_; }
  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  bool is_homogeneous_sum() const { return !f_; }
  const std::vector<HomogeneousTerm>& terms() const { return terms_; }
  // (degree, trace) when the function is a single homogeneous term.
  std::optional<HomogeneousTerm> homogeneity_tag() const;
  // Restriction to the unit sphere.
  double trace_value(const Vec3& w) const { return value(w); }
  BallFunction scaled(double c) const;

 private:
  int n_ = 1;
  std::vector<HomogeneousTerm> terms_;
  Field f_;
  GradField g_;
  double fd_step_ = 0.0;
};

BallFunction homogeneous_extension(const SphericalTrace& c, double degree);

// Radial Gauss-Legendre times a sphere rule.
struct BallQuadrature {
  int n = 1;
  std::vector<double> r, wr;
  const SphereQuadrature* sphere = nullptr;
  double integrate(const std::function<double(const Vec3&)>& f) const;
};
BallQuadrature ball_quadrature(const SphereQuadrature& sphere, int radial_points = 64);

struct EnergyReport {
  double mu = 0;
  double w_quad = 0;
  std::optional<double> w_spec;
  std::optional<double> w_tilde;
  std::optional<double> discrepancy;  // |w_quad - w_spec| / max(|w_spec|, scale)
  double quadrature_error_estimate = 0;
};

struct WeissOptions {
  const SphereQuadrature* sphere = nullptr;  // default_quadrature(n) when null
  int radial_points = 64;
  double max_relative_error = 1e-3;          // resolution gate for callables
};

EnergyReport weiss_quadrature(const BallFunction& v, double mu, const WeissOptions& opts = {});
double bilinear_R(const BallFunction& v, const BallFunction& w, double mu, const WeissOptions& opts = {});
// W~_mu(v) = W_mu(v) + int_{B_1} v h.
EnergyReport weiss_tilde(const BallFunction& v, const BallFunction::Field& h, double mu, const WeissOptions& opts = {});

// Closed forms for homogeneous extensions of sum_j c_j phi_j.
double weiss_spectral(const Eigen::VectorXd& c, const EigenBasis& basis, double mu);
struct RaisedEnergy {
  double value;     // W_mu(r^alpha psi)
  double residual;  // kappa/(n+2 alpha-1) sum (lambda(alpha) - lambda_j) c_j^2
  double kappa;
};
RaisedEnergy weiss_raised(const Eigen::VectorXd& c, const EigenBasis& basis, double mu, double alpha);
double kappa_of(double alpha, double mu, int n);

// Same closed form for node vectors of a discrete basis: uses the discrete
// Dirichlet energy and L2 mass of the node vector directly.
double weiss_homogeneous_nodes(const SphereGrid& grid, const Eigen::VectorXd& values, double mu, double degree);

struct BetaPairing {
  double beta;
  double interior;  // sum (lambda_j - lambda(mu)) c_j <phi_j, psi>
  double boundary;  // -2 int_equator (d phi) psi
  double R;         // beta / (n + alpha + mu - 1)
};
BetaPairing beta_pairing(const Eigen::VectorXd& phi, const EigenBasis& half_basis, const SphereFunction& psi, double mu,
                         double alpha, const SphereQuadrature* sphere = nullptr, double fd_step = 1e-5);

// R_mu(r^a phi, r^b psi) with phi in the span of an exact basis, via the
// spectral sum plus the equator term.
double spectral_cross(double a, const Eigen::VectorXd& phi, const EigenBasis& half_basis, double b,
                      const SphereFunction& psi, double mu, const SphereQuadrature* sphere = nullptr,
                      double fd_step = 1e-5);

}  // namespace thin_epi

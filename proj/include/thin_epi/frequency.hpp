#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "thin_epi/catalog.hpp"
#include "thin_epi/obstacle.hpp"

namespace thin_epi {

// A function on B_reach(0) in R^{n+1}. Grid-backed fields carry their
// spacing so that radii below a few cells are refused.
struct FieldSource {
  int n = 1;
  Field value;
  Field rhs;          // Delta v off the contact set; empty means zero
  double grid_h = 0;  // 0 for analytic fields
  double reach = std::numeric_limits<double>::infinity();
};

FieldSource field_from(const BallFunction& v, double reach = std::numeric_limits<double>::infinity());
FieldSource field_from(const GridSolution& sol);
FieldSource field_from(const Reduction& red, const GridSolution& sol);

// r_max 2^{-i/per_octave} down to r_min (inclusive when hit).
std::vector<double> radii_ladder(double r_max, double r_min, int per_octave = 4);

struct SurfaceMoments {
  double H = 0;
  double I = 0;
};

SurfaceMoments surface_moments(const FieldSource& v, const Vec3& x0, double r);

struct FrequencyParams {
  double theta = 0.25;
  double C_phi = 10.0;
  int k = 2;
  double gamma = 0.5;
  double mu = 0;               // > 0 enables the Weiss and H/r^{n+2mu} columns
  double reliable_cells = 6;   // radii below this many cells are unreliable
  double label_tolerance = 0.1;
};

struct FrequencyProfile {
  int n = 1;
  Vec3 x0{0, 0, 0};
  FrequencyParams params;
  std::vector<double> radii;  // strictly decreasing
  std::vector<double> H, I;
  std::vector<double> Phi;          // truncated frequency
  std::vector<double> Phi_moments;  // (1 + C r^theta)(n + 2 r I/H)
  std::vector<char> truncated;
  std::vector<char> reliable;
  std::vector<double> W, W_tilde;   // filled when params.mu > 0
  double max_violation = 0;         // largest increase of Phi toward r -> 0
  double max_h_ratio_violation = 0; // same for H / r^{n+2mu}
  std::vector<std::string> violations;
};

FrequencyProfile truncated_frequency(const FieldSource& v, const Vec3& x0, const FrequencyParams& params,
                                     const std::vector<double>& radii);

// Median of (Phi/(1 + C r^theta) - n)/2 over the 5 smallest reliable radii;
// nullopt when fewer than 5 are reliable.
std::optional<double> frequency_plateau(const FrequencyProfile& prof);
// Nearest candidate within the label tolerance.
std::optional<double> frequency_label(double plateau, const std::vector<double>& candidates, double tol);

enum class RescaleMode { L2Normalized, Homogeneous, Double };

struct Rescaled {
  FieldSource field;
  double normalizer = 1;  // ||v(x0 + rho .)||_{L2(S^n)} for the normalized modes
};

// L2Normalized: v(x0 + r x)/||v(x0 + r .)||; Homogeneous: v(x0 + r x)/r^mu;
// Double: the homogeneous rescaling at r of the normalized rescaling at rho.
Rescaled rescale(const FieldSource& v, const Vec3& x0, double r, RescaleMode mode, double mu = 1.0, double rho = 1.0);
SphericalTrace sample_trace(const FieldSource& v, GridPtr grid);

struct WeissRow {
  double r_hi = 0, r_lo = 0;
  double derivative = 0;   // difference quotient of W~ + C_W r^{k+gamma-mu}
  double bound_radial = 0; // (2/r) int (grad v_r . nu - mu v_r)^2
  double bound_split = 0;  // (n+2mu-1)/r (W(z_r) - W~(v_r)) + (1/r) int (...)^2
};

struct WeissMonotonicityReport {
  double mu = 0, C_W = 0;
  std::vector<double> radii, W_tilde, W_z;
  std::vector<WeissRow> rows;
  double min_margin = 0;  // min over rows of derivative - max(bounds)
  std::vector<std::string> violations;
};

WeissMonotonicityReport weiss_monotonicity_check(const FieldSource& v, const Vec3& x0, double mu,
                                                 const std::vector<double>& radii, double C_W, int k = 2,
                                                 double gamma = 0.5, double slack = 1e-3);

struct OscillationReport {
  double r = 0, r_prime = 0;
  double lhs = 0;          // int_{S^n} |v_r - v_r'|
  double rhs_core = 0;     // log(r/r')^{1/2} (W~(v_r) + C_W r^{k+gamma-mu})^{1/2}
  double constant = 0;     // lhs / rhs_core
  bool energy_negative = false;
};

OscillationReport oscillation_bound_check(const FieldSource& v, const Vec3& x0, double mu, double r, double r_prime,
                                          double C_W = 0.0, int k = 2, double gamma = 0.5);

struct BlowupFit {
  int m = 0;
  Polynomial fitted;                  // odd harmonic H with p = sign(x_{n+1}) H
  Eigen::VectorXd coefficients;       // in the degree-(2m+1) block
  bool in_catalog = false;            // p0 >= 0 on samples
  bool extrapolated = false;
  std::vector<double> radii, l2_distance, linf_distance;
  double exponent = 0, exponent_stderr = 0;
  double constant = 0;                // C in dist ~ C r^exponent
  bool degenerate = false;
  std::optional<double> plateau;
};

struct BlowupOptions {
  bool check_label = true;
  FrequencyParams frequency;
  int fit_min_points = 4;
};

BlowupFit blowup_fit(const FieldSource& v, const Vec3& x0, int m, const std::vector<double>& radii,
                     const BlowupOptions& opts = {});

struct VanishingReport {
  bool hypothesis = false;  // ||w_r - p||_{L^inf(B_{3/2} \ B_{1/4})} <= eta3
  double linf_distance = 0;
  std::vector<double> radii;
  std::vector<double> sup_on_Zdelta;  // max |w(r' x)| over x in Z_delta
  double max_sup = 0;
  double barrier_constant = 0;  // smallest C with w(r(. + z)) <= phi_C on B_{r1}
  bool passed = false;
};

// w is the normalized rescaling; p a unit-norm profile.
VanishingReport vanishing_on_Zdelta_check(const FieldSource& w, double r, const BlowupProfile& p, double delta,
                                          double eta3, double tolerance, int radii_count = 5, double r1 = 0.1);

struct LinfL2Report {
  double linf = 0;   // on B_{3/2} \ B_{1/4}
  double l2 = 0;     // on B_2 \ B_{1/8}
  double sigma = 0;  // 1/(n+3)
  double constant = 0;
};

LinfL2Report linfty_l2_check(const FieldSource& w, const BlowupProfile& p, double r);

struct StratumFit {
  double mu = 0;
  int count = 0;
  Vec3 point{0, 0, 0}, direction{0, 0, 0};
  double rms_residual = 0;
};

struct Stratification {
  std::vector<Vec3> nodes;
  std::vector<double> plateau;       // NaN when unresolved
  std::vector<std::string> label;    // candidate value, "unlabeled" or "unresolved"
  std::vector<StratumFit> line_fits; // n = 2 only
};

Stratification stratify_contact(const GridSolution& sol, const ProblemSpec& spec, const std::vector<double>& candidates,
                                 const FrequencyParams& params = {}, int stride = 1, double r_max = 0.5);

}  // namespace thin_epi

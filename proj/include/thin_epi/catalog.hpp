#pragma once

#include <string>

#include "thin_epi/polynomial.hpp"
#include "thin_epi/spectral.hpp"

namespace thin_epi {

// p(x) = -scale * |x_{n+1}| (p0(x') + x_{n+1}^2 p1(x', x_{n+1})), homogeneous
// of degree 2m+1, nonpositive off the thin plane.
struct BlowupProfile {
  int m = 0;
  int n = 1;
  Polynomial p0;
  Polynomial p1;
  double scale = 1.0;

  double operator()(const Vec3& x) const;
  // Gradient off the plane; on the plane, the limit from x_{n+1} > 0.
  Vec3 gradient(const Vec3& x) const;
  int degree() const { return 2 * m + 1; }
  // H with p = sign(x_{n+1}) H; an odd harmonic polynomial of degree 2m+1.
  Polynomial odd_harmonic() const;
  SphereFn trace() const;
};

// Validated and L2(S^n)-normalized profile (normalize = false keeps scale 1).
// p1 may be omitted for m = 0.
BlowupProfile make_profile(int m, int n, const Polynomial& p0, const Polynomial& p1 = {}, bool normalize = true);
// Profile determined by p0 alone: p1 is the unique correction making p
// harmonic off the plane.
BlowupProfile profile_from_p0(int m, int n, const Polynomial& p0, bool normalize = true);
// Default catalog member: p0 = x1^{2m} (n = 1) or (x1^2 + x2^2)^m (n = 2).
BlowupProfile catalog_profile(int m, int n);

Polynomial operator_T(const BlowupProfile& p);

// Equator nodes where T[p] >= delta.
EquatorMask zero_set(const BlowupProfile& p, double delta, const SphereGrid& grid);

struct AdmissibilityReport {
  double harmonic_residual = 0;    // max |Delta p| off the plane, relative
  double min_p0 = 0;               // superharmonicity needs p0 >= 0
  double euler_residual = 0;       // max |grad p . x - (2m+1) p|, relative
  double parity_residual = 0;
  double plane_residual = 0;
  bool harmonic = false, superharmonic = false, homogeneous = false, even = false, vanishes_on_plane = false;
  bool ok() const { return harmonic && superharmonic && homogeneous && even && vanishes_on_plane; }
};

AdmissibilityReport verify_admissible(const BlowupProfile& p, double tol = 1e-8, int samples = 1000);

std::string profile_to_json(const BlowupProfile& p);
BlowupProfile profile_from_json(const std::string& text);

// The mu-homogeneous planar solutions with mu in A_1, evenly reflected:
//   mu = 2m - 1/2: r^mu cos(mu theta), contact on the negative x1 axis;
//   mu = 2m:       r^mu cos(mu theta);
//   mu = 2m + 1:   -r^mu sin(mu |theta|), contact on the whole line.
// theta in [0, pi] is the angle measured from the positive x1 axis.
struct HalfspaceSolution2D {
  double mu = 1.5;
  double operator()(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  double trace_value(double theta) const;       // theta in [0, pi]
  double trace_derivative(double theta) const;  // d/dtheta on [0, pi]
  SphereFn trace() const;
  double trace_norm2() const { return kPi; }
};

bool in_A1(double mu);
HalfspaceSolution2D halfspace_2d(double mu);

}  // namespace thin_epi

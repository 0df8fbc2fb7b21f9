#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace thin_epi {

// Points in R^{n+1} are stored in three slots; for n = 1 the third slot is
// zero and the thin-normal coordinate x_{n+1} lives in slot n.
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
  InvalidArgument,
  Precondition,
  NotConverged,
  IllConditioned,
  Hypothesis,
  Resolution,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// |S^n| for n = 1, 2.
inline double sphere_area(int n) { return n == 1 ? 2.0 * kPi : 4.0 * kPi; }

// Laplace-Beltrami eigenvalue attached to alpha-homogeneous harmonic extensions.
inline double lambda_of(double alpha, int n) { return alpha * (n + alpha - 1.0); }

// Reflection x_{n+1} -> -x_{n+1}.
inline Vec3 reflect(const Vec3& x, int n) {
  Vec3 y = x;
  y[n] = -y[n];
  return y;
}

}  // namespace thin_epi

#pragma once

#include <array>
#include <map>
#include <string>

#include "thin_epi/core.hpp"

namespace thin_epi {

using Exponent = std::array<int, 3>;

// Dense-in-spirit, sparse-in-storage polynomial in up to three variables.
class Polynomial {
 public:
  Polynomial() = default;
  static Polynomial constant(double c);
  static Polynomial monomial(const Exponent& e, double c = 1.0);
  static Polynomial variable(int i) { return monomial(var_exp(i)); }

  double operator()(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;

  Polynomial derivative(int var) const;
  // Laplacian in the first `nvars` variables.
  Polynomial laplacian(int nvars) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  Polynomial& operator+=(const Polynomial& o);

  int degree() const;
  bool is_zero(double tol = 0.0) const;
  bool is_homogeneous(int deg, double tol = 0.0) const;
  double max_abs_coefficient() const;
  // Highest exponent of variable `var` appearing.
  int max_power(int var) const;

  // Degree-k Taylor polynomial at x0, as a polynomial in x.
  Polynomial taylor(const Vec3& x0, int k) const;

  const std::map<Exponent, double>& terms() const { return terms_; }
  std::string to_string() const;

 private:
  static Exponent var_exp(int i) {
    Exponent e{0, 0, 0};
    e[i] = 1;
    return e;
  }
  void add_term(const Exponent& e, double c);
  std::map<Exponent, double> terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

}  // namespace thin_epi

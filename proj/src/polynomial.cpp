#include "thin_epi/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace thin_epi {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

Polynomial Polynomial::constant(double c) { return monomial({0, 0, 0}, c); }

Polynomial Polynomial::monomial(const Exponent& e, double c) {
  Polynomial p;
  p.add_term(e, c);
  return p;
}

void Polynomial::add_term(const Exponent& e, double c) {
  if (c == 0.0) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::operator()(const Vec3& x) const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) s += c * ipow(x[0], e[0]) * ipow(x[1], e[1]) * ipow(x[2], e[2]);
  return s;
}

Vec3 Polynomial::gradient(const Vec3& x) const {
  Vec3 g{0, 0, 0};
  for (const auto& [e, c] : terms_) {
    for (int v = 0; v < 3; ++v) {
      if (e[v] == 0) continue;
      double t = c * e[v];
      for (int u = 0; u < 3; ++u) t *= ipow(x[u], u == v ? e[u] - 1 : e[u]);
      g[v] += t;
    }
  }
  return g;
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial d;
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponent f = e;
    f[var] -= 1;
    d.add_term(f, c * e[var]);
  }
  return d;
}

Polynomial Polynomial::laplacian(int nvars) const {
  Polynomial l;
  for (int v = 0; v < nvars; ++v) l += derivative(v).derivative(v);
  return l;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  r += o;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r;
  for (const auto& [e1, c1] : terms_)
    for (const auto& [e2, c2] : o.terms_) r.add_term({e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]}, c1 * c2);
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r;
  if (s == 0.0) return r;
  for (const auto& [e, c] : terms_) r.terms_.emplace(e, c * s);
  return r;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
  return d;
}

bool Polynomial::is_zero(double tol) const {
  for (const auto& [e, c] : terms_)
    if (std::abs(c) > tol) return false;
  return true;
}

bool Polynomial::is_homogeneous(int deg, double tol) const {
  for (const auto& [e, c] : terms_)
    if (e[0] + e[1] + e[2] != deg && std::abs(c) > tol) return false;
  return true;
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

int Polynomial::max_power(int var) const {
  int m = 0;
  for (const auto& [e, c] : terms_)
    if (c != 0.0) m = std::max(m, e[var]);
  return m;
}

Polynomial Polynomial::taylor(const Vec3& x0, int k) const {
  // Expand each monomial (y + x0)^e binomially, keep |a| <= k in y, then
  // substitute y = x - x0.
  Polynomial in_y;
  for (const auto& [e, c] : terms_) {
    for (int a0 = 0; a0 <= e[0]; ++a0)
      for (int a1 = 0; a1 <= e[1]; ++a1)
        for (int a2 = 0; a2 <= e[2]; ++a2) {
          if (a0 + a1 + a2 > k) continue;
          double coef = c * binomial(e[0], a0) * ipow(x0[0], e[0] - a0) * binomial(e[1], a1) *
                        ipow(x0[1], e[1] - a1) * binomial(e[2], a2) * ipow(x0[2], e[2] - a2);
          in_y.add_term({a0, a1, a2}, coef);
        }
  }
  Polynomial shift[3];
  for (int v = 0; v < 3; ++v) shift[v] = Polynomial::variable(v) - Polynomial::constant(x0[v]);
  Polynomial out;
  for (const auto& [e, c] : in_y.terms_) {
    Polynomial t = Polynomial::constant(c);
    for (int v = 0; v < 3; ++v)
      for (int i = 0; i < e[v]; ++i) t = t * shift[v];
    out += t;
  }
  return out;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  static const char* names[3] = {"x1", "x2", "x3"};
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (int v = 0; v < 3; ++v)
      if (e[v] > 0) os << "*" << names[v] << (e[v] > 1 ? "^" + std::to_string(e[v]) : "");
  }
  return os.str();
}

}  // namespace thin_epi

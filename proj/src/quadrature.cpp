#include "thin_epi/quadrature.hpp"

#include <cmath>

#include "thin_epi/core.hpp"

namespace thin_epi {

namespace {

// P_k(x) and P_{k-1}(x) by the three-term recurrence.
void legendre_pair(int k, double x, double& pk, double& pkm1) {
  double p0 = 1.0, p1 = x;
  if (k == 0) {
    pk = 1.0;
    pkm1 = 0.0;
    return;
  }
  for (int j = 2; j <= k; ++j) {
    double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  pk = p1;
  pkm1 = p0;
}

}  // namespace

Rule1D gauss_legendre(int k, double a, double b) {
  require(k >= 1, "gauss_legendre: need at least one node");
  Rule1D r;
  r.x.resize(k);
  r.w.resize(k);
  for (int i = 0; i < k; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (k + 0.5));
    double pk = 0, pkm1 = 0, dp = 1;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(k, x, pk, pkm1);
      dp = k * (x * pk - pkm1) / (x * x - 1.0);
      double dx = pk / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre_pair(k, x, pk, pkm1);
    dp = k * (x * pk - pkm1) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // ascending order
    r.x[k - 1 - i] = 0.5 * (b - a) * x + 0.5 * (b + a);
    r.w[k - 1 - i] = 0.5 * (b - a) * w;
  }
  return r;
}

Rule1D gauss_radau(int k, double a, double b) {
  require(k >= 2, "gauss_radau: need at least two nodes");
  // Free nodes are the roots of (P_{k-1} + P_k)/(1 + x) on (-1, 1).
  Rule1D r;
  r.x.push_back(-1.0);
  r.w.push_back(2.0 / (double(k) * k));
  auto f = [&](double x, double& val, double& der) {
    double pk, pkm1, pkm1b, pkm2;
    legendre_pair(k, x, pk, pkm1);
    legendre_pair(k - 1, x, pkm1b, pkm2);
    double dpk = k * (x * pk - pkm1) / (x * x - 1.0);
    double dpkm1 = (k - 1) * (x * pkm1 - pkm2) / (x * x - 1.0);
    val = pk + pkm1;
    der = dpk + dpkm1;
  };
  for (int i = 1; i < k; ++i) {
    // Chebyshev-Gauss-Radau initial guess.
    double x = -std::cos(2.0 * kPi * i / (2.0 * k - 1.0));
    for (int it = 0; it < 200; ++it) {
      double val, der;
      f(x, val, der);
      // deflate the known root at x = -1
      double g = val / (1.0 + x);
      double dg = der / (1.0 + x) - val / ((1.0 + x) * (1.0 + x));
      double dx = g / dg;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double pk, pkm1;
    legendre_pair(k - 1, x, pkm1, pk);
    r.x.push_back(x);
    r.w.push_back((1.0 - x) / (double(k) * k * pkm1 * pkm1));
  }
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    r.x[i] = 0.5 * (b - a) * r.x[i] + 0.5 * (b + a);
    r.w[i] *= 0.5 * (b - a);
  }
  r.x[0] = a;
  return r;
}

const TriangleRule& triangle_rule_deg5() {
  static const TriangleRule rule = [] {
    TriangleRule t;
    const double s15 = std::sqrt(15.0);
    const double b1 = (6.0 + s15) / 21.0, a1 = 1.0 - 2.0 * b1;
    const double b2 = (6.0 - s15) / 21.0, a2 = 1.0 - 2.0 * b2;
    const double w0 = 0.225, w1 = (155.0 + s15) / 1200.0, w2 = (155.0 - s15) / 1200.0;
    t.bary = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
              {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
    t.w = {w0, w1, w1, w1, w2, w2, w2};
    return t;
  }();
  return rule;
}

}  // namespace thin_epi

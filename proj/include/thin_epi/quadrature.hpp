#pragma once

#include <array>
#include <vector>

namespace thin_epi {

struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre nodes and weights mapped to [a, b].
Rule1D gauss_legendre(int k, double a = -1.0, double b = 1.0);

// Gauss-Radau rule on [a, b] that contains the left endpoint a as a node.
Rule1D gauss_radau(int k, double a = -1.0, double b = 1.0);

// Symmetric 7-point degree-5 rule on the reference triangle, barycentric
// coordinates with weights summing to one.
struct TriangleRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> w;
};
const TriangleRule& triangle_rule_deg5();

}  // namespace thin_epi

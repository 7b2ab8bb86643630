#pragma once

#include <array>
#include <vector>

namespace hardylab::quadrature {

/// Rule on [0, 1]; weights sum to 1.
struct Rule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Rule on the reference triangle (0,0), (1,0), (0,1) in coordinates
/// (xi, eta); weights are fractions of the area and sum to 1.
struct TriangleRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  int degree = 0;
};

/// n-point Gauss-Legendre rule, exact for degree 2n - 1. All points are
/// strictly inside (0, 1).
Rule1D gauss_legendre(int n);

/// n <= 4 selects the 7-point degree-5 rule; larger n uses the collapsed
/// (Duffy) product of two n-point Gauss-Legendre rules, exact for degree
/// 2n - 2. All points are strictly interior.
TriangleRule triangle_rule(int n);

} // namespace hardylab::quadrature

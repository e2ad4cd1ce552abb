#pragma once

#include <vector>

#include "igaflow/common.hpp"

namespace igaflow {

/// Gauss-Legendre rule on the reference interval (0,1); weights sum to 1.
/// Exact for polynomials of degree <= 2q-1 on each span it is mapped to.
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

QuadratureRule gauss_legendre(int q);

/// Rule used for fields of the given polynomial degree: degree+2 points per
/// direction per knot span (one beyond the usual degree+1, to absorb rational
/// geometry weights and the disk's singular-corner parametrization).
QuadratureRule quadrature_for(int degree);

}  // namespace igaflow

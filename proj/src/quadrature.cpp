#include "igaflow/quadrature.hpp"

#include <cmath>

namespace igaflow {

// Nodes via Newton on P_q with the standard (3-term) recurrence; converges to
// machine precision in a handful of iterations from the Chebyshev-like guess.
QuadratureRule gauss_legendre(int q) {
  require(q >= 1, "gauss_legendre: q must be >= 1");
  QuadratureRule rule;
  rule.points.resize(q);
  rule.weights.resize(q);
  const auto legendre = [q](double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= q; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = q * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < q; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double p = 1.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre(x, p, dp);  // dp at the converged node, for the weight
    // map [-1,1] -> [0,1]
    rule.points[q - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[q - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

QuadratureRule quadrature_for(int degree) {
  require(degree >= 1, "quadrature_for: degree must be >= 1");
  return gauss_legendre(degree + 2);
}

}  // namespace igaflow

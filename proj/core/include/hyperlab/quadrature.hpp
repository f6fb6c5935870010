#pragma once

#include <vector>

namespace hyperlab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule with `points` nodes mapped to [a, b].
QuadratureRule gauss_legendre(int points, double a = -1.0, double b = 1.0);

// Composite Gauss-Legendre: `panels` equal panels of `points` nodes each.
QuadratureRule composite_gauss_legendre(int points, int panels, double a, double b);

}  // namespace hyperlab

#pragma once

#include <vector>

namespace fvk::util {

/// Gauss-Legendre rule mapped to [0, 1]; weights sum to 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule (n >= 1). Thread-safe after first use of each n.
const QuadratureRule& gauss_legendre(int n);

}  // namespace fvk::util

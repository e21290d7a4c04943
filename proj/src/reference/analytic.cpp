#include "fvk/reference/analytic.hpp"

#include <cmath>

namespace fvk::ref {

double kirsch_hoop_force(double p, double h, double phi) {
  const double s = std::sin(phi);
  return p * h * (1.0 - 2.0 * std::cos(2.0 * phi)) * s * s;
}

}  // namespace fvk::ref

#pragma once

/// @file analytic.hpp
/// @brief Closed-form solutions.

namespace fvk::ref {

/// N_xx on the edge of a circular hole in an infinite plate under uniaxial
/// x tension p (MPa): p h (1 - 2 cos 2phi) sin^2 phi, phi measured from x.
double kirsch_hoop_force(double p, double h, double phi);

}  // namespace fvk::ref

#pragma once

#include <vector>

#include "fvk/autodiff/jet2.hpp"

namespace fvk::ad {

/// Values and mixed partials of the three displacement fields at one point.
/// Units follow the fields: mm for displacements, 1/mm^k for k-th derivatives.
template <class T>
struct DerivativeBundle {
  Jet2<T> ux;
  Jet2<T> uy;
  Jet2<T> w;

  DerivativeBundle() = default;
  explicit DerivativeBundle(int order) : ux(order), uy(order), w(order) {}
  DerivativeBundle(Jet2<T> ux_, Jet2<T> uy_, Jet2<T> w_)
      : ux(std::move(ux_)), uy(std::move(uy_)), w(std::move(w_)) {}

  [[nodiscard]] int order() const { return ux.order(); }

  Jet2<T>& field(int i) { return i == 0 ? ux : (i == 1 ? uy : w); }
  const Jet2<T>& field(int i) const { return i == 0 ? ux : (i == 1 ? uy : w); }
};

/// d(loss)/d(parameter), same flat layout as nn::NetworkParams::values().
using ParamGradient = std::vector<double>;

}  // namespace fvk::ad

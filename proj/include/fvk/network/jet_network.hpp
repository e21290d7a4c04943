#pragma once

/// @file jet_network.hpp
/// @brief Forward jets through the network with a matching reverse sweep.
///
/// The forward pass propagates order-K jets of the inputs through every
/// layer and keeps the intermediates (layer jets, powers of the centred
/// pre-activation, activation Taylor coefficients). Given the adjoints of the
/// output jet coefficients, backward() accumulates the exact gradient with
/// respect to every weight and bias, including the dependence of every stored
/// derivative on the parameters.
///
/// One evaluator per thread; it owns its scratch space.

#include <span>
#include <vector>

#include "fvk/autodiff/jet2.hpp"
#include "fvk/network/network.hpp"

namespace fvk::nn {

class JetNetworkEvaluator {
 public:
  explicit JetNetworkEvaluator(const NetworkParams& shape);

  /// Raw output jets at (x, y). `values` is the flat parameter vector.
  const std::vector<ad::Jet2<double>>& forward(std::span<const double> values, double x, double y, int order);

  /// Adds d(head)/d(values) to `grad`, where `output_adjoint[i][c]` is
  /// d(head)/d(output jet i, Taylor coefficient c) at the last forward point.
  void backward(std::span<const double> values, std::span<const ad::Jet2<double>> output_adjoint,
                std::span<double> grad);

 private:
  struct Composition {
    std::array<ad::Jet2<double>, ad::kMaxJetOrder + 1> power;  // power[n] = delta^n, n >= 1
    std::array<double, ad::kMaxTaylorTerms> taylor{};          // f^{(n)}(z0) / n!
  };

  // Kernels with the jet order fixed at compile time.
  template <int K>
  void forward_k(std::span<const double> values);
  template <int K>
  void backward_k(std::span<const double> values, std::span<double> grad);
  template <int K>
  void compose_forward(const double* z, Composition& c, ad::Jet2<double>& out) const;
  template <int K>
  void compose_backward(const Composition& c, const double* adj_out, ad::Jet2<double>& adj_z) const;
  void activation_taylor(double z0, int count, double* out) const;

  std::vector<int> sizes_;
  Activation activation_;
  InputScaling scaling_;
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
  int order_ = 0;

  std::vector<std::vector<ad::Jet2<double>>> act_;   // act_[k], k = 0..L
  std::vector<std::vector<Composition>> comp_;       // comp_[k], hidden layers only
  std::vector<std::vector<ad::Jet2<double>>> adj_;   // scratch adjoints per layer
};

/// Adjoint of c = x * y (truncated product): adds adj_c * dy-contribution to
/// adj_x and adj_c * dx-contribution to adj_y.
void product_adjoint(const ad::Jet2<double>& x, const ad::Jet2<double>& y, const ad::Jet2<double>& adj_c,
                     ad::Jet2<double>* adj_x, ad::Jet2<double>* adj_y);

}  // namespace fvk::nn

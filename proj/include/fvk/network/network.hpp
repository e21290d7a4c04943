#pragma once

/// @file network.hpp
/// @brief Fully connected approximator of the displacement field.
///
/// Layer k (1..L) maps A^{k-1} (P_{k-1} values) to
///   A^k = f(W^k^T A^{k-1} + b^k),
/// with no activation on the output layer. All weights and biases live in a
/// single flat vector: for each layer, W^k row-major (P_{k-1} x P_k) followed
/// by b^k.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fvk/autodiff/bundle.hpp"
#include "fvk/autodiff/jet2.hpp"

namespace fvk::nn {

enum class Activation { tanh, sigmoid, relu };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

/// Fixed affine map applied to the coordinates before the first layer,
/// xi = (x - center_x) / half_width_x. Not trained.
struct InputScaling {
  double center_x = 0.0;
  double center_y = 0.0;
  double half_width_x = 1.0;
  double half_width_y = 1.0;
};

class NetworkParams {
 public:
  NetworkParams() = default;
  NetworkParams(std::vector<int> layer_sizes, Activation activation, InputScaling scaling = {});

  [[nodiscard]] const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  [[nodiscard]] int layer_count() const { return static_cast<int>(layer_sizes_.size()) - 1; }
  [[nodiscard]] int input_size() const { return layer_sizes_.front(); }
  [[nodiscard]] int output_size() const { return layer_sizes_.back(); }
  [[nodiscard]] int width(int layer) const { return layer_sizes_[layer]; }
  [[nodiscard]] Activation activation() const { return activation_; }
  [[nodiscard]] const InputScaling& input_scaling() const { return scaling_; }

  /// Total parameter count, sum P_{k-1} P_k + sum P_k.
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  [[nodiscard]] std::size_t weight_offset(int layer) const { return offsets_[layer - 1]; }
  [[nodiscard]] std::size_t bias_offset(int layer) const {
    return offsets_[layer - 1] + static_cast<std::size_t>(layer_sizes_[layer - 1]) * layer_sizes_[layer];
  }

  double& weight(int layer, int i, int j) { return values_[weight_offset(layer) + i * width(layer) + j]; }
  [[nodiscard]] double weight(int layer, int i, int j) const {
    return values_[weight_offset(layer) + i * width(layer) + j];
  }
  double& bias(int layer, int j) { return values_[bias_offset(layer) + j]; }
  [[nodiscard]] double bias(int layer, int j) const { return values_[bias_offset(layer) + j]; }

  std::vector<double>& values() { return values_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

 private:
  std::vector<int> layer_sizes_;
  Activation activation_ = Activation::tanh;
  InputScaling scaling_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

/// Glorot-uniform weights in +-sqrt(6 / (P_{k-1} + P_k)), zero biases.
/// Deterministic for a given seed.
NetworkParams initialize(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed,
                         InputScaling scaling = {});

/// Plain evaluation of the raw network outputs at (x, y).
std::vector<double> forward(const NetworkParams& params, double x, double y);

template <class T>
T activate(Activation a, const T& z) {
  using std::exp;
  using std::tanh;
  switch (a) {
    case Activation::tanh:
      return tanh(z);
    case Activation::sigmoid:
      return 1.0 / (1.0 + exp(-z));
    case Activation::relu:
      return z > 0.0 ? z : T(0.0);
  }
  return z;
}

template <class T>
ad::Jet2<T> activate(Activation a, const ad::Jet2<T>& z) {
  switch (a) {
    case Activation::tanh:
      return ad::tanh(z);
    case Activation::sigmoid:
      return ad::sigmoid(z);
    case Activation::relu:
      return ad::relu(z);
  }
  return z;
}

/// Raw output jets for inputs given as jets. `values` may be a different
/// scalar type than the stored parameters (e.g. recorded ad::Var) but must
/// have the layout of `shape`.
template <class T>
std::vector<ad::Jet2<T>> forward_jets(const NetworkParams& shape, std::span<const T> values,
                                      const ad::Jet2<T>& x, const ad::Jet2<T>& y) {
  const InputScaling& s = shape.input_scaling();
  std::vector<ad::Jet2<T>> a{(x - s.center_x) * (1.0 / s.half_width_x),
                             (y - s.center_y) * (1.0 / s.half_width_y)};
  const int layers = shape.layer_count();
  for (int k = 1; k <= layers; ++k) {
    const int n_in = shape.width(k - 1);
    const int n_out = shape.width(k);
    const std::size_t w0 = shape.weight_offset(k);
    const std::size_t b0 = shape.bias_offset(k);
    std::vector<ad::Jet2<T>> z;
    z.reserve(n_out);
    for (int j = 0; j < n_out; ++j) {
      ad::Jet2<T> acc(x.order(), values[b0 + j]);
      for (int i = 0; i < n_in; ++i) acc += a[i] * values[w0 + i * n_out + j];
      z.push_back(k < layers ? activate(shape.activation(), acc) : acc);
    }
    a = std::move(z);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Output transforms

/// (cx x + cy y + c0)^power
struct LinearFactor {
  double cx = 0.0;
  double cy = 0.0;
  double c0 = 0.0;
  int power = 1;

  static LinearFactor times_x(double offset = 0.0, double scale = 1.0) { return {scale, 0.0, -offset * scale, 1}; }
  static LinearFactor times_y(double offset = 0.0, double scale = 1.0) { return {0.0, scale, -offset * scale, 1}; }
};

/// Multiplier applied to one raw output: scale * prod(factors).
struct OutputFactor {
  double scale = 1.0;
  std::vector<LinearFactor> factors;

  [[nodiscard]] double value(double x, double y) const;
  [[nodiscard]] ad::Jet2<double> jet(double x, double y, int order) const;
};

/// Per-output factors for (u_x, u_y, w). Identity by default.
struct OutputTransform {
  OutputFactor ux;
  OutputFactor uy;
  OutputFactor w;

  [[nodiscard]] const OutputFactor& factor(int i) const { return i == 0 ? ux : (i == 1 ? uy : w); }
  OutputFactor& factor(int i) { return i == 0 ? ux : (i == 1 ? uy : w); }
  [[nodiscard]] bool is_identity() const;
};

/// Applies the transform to raw outputs (2 or 3 values); missing w is 0.
std::vector<double> apply_transform(std::span<const double> raw, const OutputTransform& transform, double x,
                                    double y);

/// Exact derivatives up to `order` of the transformed displacement fields.
/// A two-output network yields w = 0.
ad::DerivativeBundle<double> derivatives_at(const NetworkParams& params, double x, double y, int order,
                                            const OutputTransform& transform);

// ---------------------------------------------------------------------------
// Checkpoints

/// Text checkpoint:
///   fvk-network 1
///   activation <tanh|sigmoid|relu>
///   input_scaling <cx> <cy> <sx> <sy>
///   layers <P_0> ... <P_L>
///   values <count>
///   <one hexadecimal float per line>
void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_checkpoint(const std::filesystem::path& path);

}  // namespace fvk::nn

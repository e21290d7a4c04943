#include "fvk/network/jet_network.hpp"

#include <stdexcept>

namespace fvk::nn {

using ad::Jet2;

void product_adjoint(const Jet2<double>& x, const Jet2<double>& y, const Jet2<double>& adj_c, Jet2<double>* adj_x,
                     Jet2<double>* adj_y) {
  const ad::ProductTerm* terms = ad::product_terms_begin();
  const int n = ad::product_term_count(adj_c.order());
  for (int t = 0; t < n; ++t) {
    const double a = adj_c[terms[t].k];
    if (a == 0.0) continue;
    if (adj_x != nullptr) (*adj_x)[terms[t].i] += a * y[terms[t].j];
    if (adj_y != nullptr) (*adj_y)[terms[t].j] += a * x[terms[t].i];
  }
}

namespace {

// Truncated products on raw coefficient arrays of a fixed order.
template <int K>
struct Fixed {
  static constexpr int S = ad::jet_size(K);
  static constexpr int P = ad::detail::product_term_count(K);

  static void mul(const double* a, const double* b, double* c) {
    for (int m = 0; m < S; ++m) c[m] = 0.0;
    for (int t = 0; t < P; ++t) {
      const ad::ProductTerm& pt = ad::detail::kProductTable.terms[t];
      c[pt.k] += a[pt.i] * b[pt.j];
    }
  }

  static void mul_adjoint(const double* x, const double* y, const double* adj_c, double* adj_x, double* adj_y) {
    for (int t = 0; t < P; ++t) {
      const ad::ProductTerm& pt = ad::detail::kProductTable.terms[t];
      const double a = adj_c[pt.k];
      adj_x[pt.i] += a * y[pt.j];
      adj_y[pt.j] += a * x[pt.i];
    }
  }
};

void ensure_order(Jet2<double>& j, int order) {
  if (j.order() != order) j = Jet2<double>(order);
}

}  // namespace

JetNetworkEvaluator::JetNetworkEvaluator(const NetworkParams& shape)
    : sizes_(shape.layer_sizes()), activation_(shape.activation()), scaling_(shape.input_scaling()) {
  const int layers = shape.layer_count();
  for (int k = 1; k <= layers; ++k) {
    weight_offset_.push_back(shape.weight_offset(k));
    bias_offset_.push_back(shape.bias_offset(k));
  }
  act_.resize(layers + 1);
  comp_.resize(layers + 1);
  adj_.resize(layers + 1);
  for (int k = 0; k <= layers; ++k) {
    act_[k].resize(sizes_[k]);
    adj_[k].resize(sizes_[k]);
    if (k > 0 && k < layers) comp_[k].resize(sizes_[k]);
  }
}

void JetNetworkEvaluator::activation_taylor(double z0, int count, double* out) const {
  switch (activation_) {
    case Activation::tanh:
      ad::tanh_taylor(z0, count, out);
      break;
    case Activation::sigmoid:
      ad::sigmoid_taylor(z0, count, out);
      break;
    case Activation::relu:
      ad::relu_taylor(z0, count, out);
      break;
  }
}

template <int K>
void JetNetworkEvaluator::compose_forward(const double* z, Composition& c, Jet2<double>& out) const {
  constexpr int S = Fixed<K>::S;
  activation_taylor(z[0], K + 2, c.taylor.data());
  ensure_order(out, K);
  out[0] = c.taylor[0];
  if constexpr (K > 0) {
    ensure_order(c.power[1], K);
    double* delta = &c.power[1][0];
    delta[0] = 0.0;
    for (int m = 1; m < S; ++m) delta[m] = z[m];
    for (int n = 2; n <= K; ++n) {
      ensure_order(c.power[n], K);
      Fixed<K>::mul(&c.power[n - 1][0], delta, &c.power[n][0]);
    }
    for (int m = 1; m < S; ++m) {
      double acc = 0.0;
      for (int n = 1; n <= K; ++n) acc += c.taylor[n] * c.power[n][m];
      out[m] = acc;
    }
  }
}

template <int K>
void JetNetworkEvaluator::compose_backward(const Composition& c, const double* adj_out, Jet2<double>& adj_z) const {
  constexpr int S = Fixed<K>::S;
  ensure_order(adj_z, K);
  // Dependence through the Taylor coefficients f^{(n)}(z0)/n!, whose
  // derivative in z0 is (n + 1) times the next coefficient.
  double adj_z0 = adj_out[0] * c.taylor[1];
  if constexpr (K > 0) {
    double adj_power[K + 1][S];
    for (int n = 1; n <= K; ++n) {
      const Jet2<double>& p = c.power[n];
      double dot = 0.0;
      for (int m = 1; m < S; ++m) dot += adj_out[m] * p[m];
      adj_z0 += dot * (n + 1) * c.taylor[n + 1];
      adj_power[n][0] = 0.0;
      for (int m = 1; m < S; ++m) adj_power[n][m] = adj_out[m] * c.taylor[n];
    }
    // power[n] = power[n-1] * delta
    for (int n = K; n >= 2; --n) {
      Fixed<K>::mul_adjoint(&c.power[n - 1][0], &c.power[1][0], adj_power[n], adj_power[n - 1], adj_power[1]);
    }
    for (int m = 1; m < S; ++m) adj_z[m] = adj_power[1][m];
  }
  adj_z[0] = adj_z0;
}

template <int K>
void JetNetworkEvaluator::forward_k(std::span<const double> values) {
  constexpr int S = Fixed<K>::S;
  const int layers = static_cast<int>(sizes_.size()) - 1;
  double z[S];
  for (int k = 1; k <= layers; ++k) {
    const int n_in = sizes_[k - 1];
    const int n_out = sizes_[k];
    const double* w = values.data() + weight_offset_[k - 1];
    const double* b = values.data() + bias_offset_[k - 1];
    const auto& prev = act_[k - 1];
    for (int j = 0; j < n_out; ++j) {
      z[0] = b[j];
      for (int m = 1; m < S; ++m) z[m] = 0.0;
      for (int i = 0; i < n_in; ++i) {
        const double wij = w[i * n_out + j];
        const double* a = &prev[i][0];
        for (int m = 0; m < S; ++m) z[m] += wij * a[m];
      }
      if (k < layers) {
        compose_forward<K>(z, comp_[k][j], act_[k][j]);
      } else {
        Jet2<double>& out = act_[k][j];
        ensure_order(out, K);
        for (int m = 0; m < S; ++m) out[m] = z[m];
      }
    }
  }
}

template <int K>
void JetNetworkEvaluator::backward_k(std::span<const double> values, std::span<double> grad) {
  constexpr int S = Fixed<K>::S;
  const int layers = static_cast<int>(sizes_.size()) - 1;
  double adj_a[S];
  for (int k = layers; k >= 1; --k) {
    const int n_in = sizes_[k - 1];
    const int n_out = sizes_[k];
    const double* w = values.data() + weight_offset_[k - 1];
    double* gw = grad.data() + weight_offset_[k - 1];
    double* gb = grad.data() + bias_offset_[k - 1];
    const auto& prev = act_[k - 1];
    for (int j = 0; j < n_out; ++j) gb[j] += adj_[k][j][0];
    for (int i = 0; i < n_in; ++i) {
      const double* a = &prev[i][0];
      for (int j = 0; j < n_out; ++j) {
        const double* az = &adj_[k][j][0];
        double dot = 0.0;
        for (int m = 0; m < S; ++m) dot += a[m] * az[m];
        gw[i * n_out + j] += dot;
      }
    }
    if (k == 1) break;
    // adjoint of the previous layer's activations, then through its activation
    for (int i = 0; i < n_in; ++i) {
      for (int m = 0; m < S; ++m) adj_a[m] = 0.0;
      for (int j = 0; j < n_out; ++j) {
        const double wij = w[i * n_out + j];
        const double* az = &adj_[k][j][0];
        for (int m = 0; m < S; ++m) adj_a[m] += wij * az[m];
      }
      compose_backward<K>(comp_[k - 1][i], adj_a, adj_[k - 1][i]);
    }
  }
}

const std::vector<Jet2<double>>& JetNetworkEvaluator::forward(std::span<const double> values, double x, double y,
                                                              int order) {
  ad::detail::check_order(order);
  order_ = order;
  auto [jx, jy] = ad::jet_seed(x, y, std::max(order, 1));
  if (order == 0) {
    jx = ad::truncate(jx, 0);
    jy = ad::truncate(jy, 0);
  }
  act_[0][0] = (jx - scaling_.center_x) * (1.0 / scaling_.half_width_x);
  act_[0][1] = (jy - scaling_.center_y) * (1.0 / scaling_.half_width_y);
  switch (order) {
    case 0: forward_k<0>(values); break;
    case 1: forward_k<1>(values); break;
    case 2: forward_k<2>(values); break;
    case 3: forward_k<3>(values); break;
    default: forward_k<4>(values); break;
  }
  return act_.back();
}

void JetNetworkEvaluator::backward(std::span<const double> values, std::span<const Jet2<double>> output_adjoint,
                                   std::span<double> grad) {
  const int layers = static_cast<int>(sizes_.size()) - 1;
  if (static_cast<int>(output_adjoint.size()) != sizes_[layers]) {
    throw std::invalid_argument("output adjoint count does not match network outputs");
  }
  // adj_[k][j] holds the adjoint of the pre-activation of layer k.
  for (int j = 0; j < sizes_[layers]; ++j) {
    Jet2<double>& a = adj_[layers][j];
    ensure_order(a, order_);
    for (int m = 0; m < ad::jet_size(order_); ++m) a[m] = output_adjoint[j][m];
  }
  switch (order_) {
    case 0: backward_k<0>(values, grad); break;
    case 1: backward_k<1>(values, grad); break;
    case 2: backward_k<2>(values, grad); break;
    case 3: backward_k<3>(values, grad); break;
    default: backward_k<4>(values, grad); break;
  }
}

}  // namespace fvk::nn

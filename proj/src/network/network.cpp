#include "fvk/network/network.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fvk/util/random.hpp"

namespace fvk::nn {

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::tanh:
      return "tanh";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::relu:
      return "relu";
  }
  return "?";
}

NetworkParams::NetworkParams(std::vector<int> layer_sizes, Activation activation, InputScaling scaling)
    : layer_sizes_(std::move(layer_sizes)), activation_(activation), scaling_(scaling) {
  if (layer_sizes_.size() < 2) throw std::invalid_argument("network needs at least input and output layers");
  for (int p : layer_sizes_) {
    if (p <= 0) throw std::invalid_argument("degenerate layer size " + std::to_string(p));
  }
  if (layer_sizes_.front() != 2) throw std::invalid_argument("network input dimension must be 2");
  if (scaling_.half_width_x <= 0.0 || scaling_.half_width_y <= 0.0) {
    throw std::invalid_argument("input scaling half widths must be positive");
  }
  std::size_t offset = 0;
  for (std::size_t k = 1; k < layer_sizes_.size(); ++k) {
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(layer_sizes_[k - 1]) * layer_sizes_[k] + layer_sizes_[k];
  }
  values_.assign(offset, 0.0);
}

NetworkParams initialize(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed,
                         InputScaling scaling) {
  NetworkParams params(layer_sizes, activation, scaling);
  util::Rng rng(seed);
  for (int k = 1; k <= params.layer_count(); ++k) {
    const double bound = std::sqrt(6.0 / (params.width(k - 1) + params.width(k)));
    for (int i = 0; i < params.width(k - 1); ++i) {
      for (int j = 0; j < params.width(k); ++j) params.weight(k, i, j) = rng.uniform(-bound, bound);
    }
  }
  return params;
}

std::vector<double> forward(const NetworkParams& params, double x, double y) {
  const InputScaling& s = params.input_scaling();
  std::vector<double> a{(x - s.center_x) / s.half_width_x, (y - s.center_y) / s.half_width_y};
  std::vector<double> z;
  for (int k = 1; k <= params.layer_count(); ++k) {
    z.assign(params.width(k), 0.0);
    for (int j = 0; j < params.width(k); ++j) {
      double acc = params.bias(k, j);
      for (int i = 0; i < params.width(k - 1); ++i) acc += params.weight(k, i, j) * a[i];
      z[j] = k < params.layer_count() ? activate(params.activation(), acc) : acc;
    }
    a.swap(z);
  }
  return a;
}

double OutputFactor::value(double x, double y) const {
  double v = scale;
  for (const LinearFactor& f : factors) v *= std::pow(f.cx * x + f.cy * y + f.c0, f.power);
  return v;
}

ad::Jet2<double> OutputFactor::jet(double x, double y, int order) const {
  ad::Jet2<double> r(order, scale);
  if (factors.empty()) return r;
  auto [jx, jy] = ad::jet_seed(x, y, std::max(order, 1));
  for (const LinearFactor& f : factors) {
    ad::Jet2<double> lin = jx * f.cx + jy * f.cy + f.c0;
    if (order == 0) lin = ad::truncate(lin, 0);
    for (int p = 0; p < f.power; ++p) r = r * lin;
  }
  return r;
}

bool OutputTransform::is_identity() const {
  for (int i = 0; i < 3; ++i) {
    if (factor(i).scale != 1.0 || !factor(i).factors.empty()) return false;
  }
  return true;
}

std::vector<double> apply_transform(std::span<const double> raw, const OutputTransform& transform, double x,
                                    double y) {
  std::vector<double> out(3, 0.0);
  for (std::size_t i = 0; i < raw.size() && i < 3; ++i) out[i] = raw[i] * transform.factor(i).value(x, y);
  return out;
}

ad::DerivativeBundle<double> derivatives_at(const NetworkParams& params, double x, double y, int order,
                                            const OutputTransform& transform) {
  if (order > ad::kMaxJetOrder) {
    throw std::invalid_argument("derivative order " + std::to_string(order) + " exceeds engine limit " +
                                std::to_string(ad::kMaxJetOrder));
  }
  if (params.output_size() < 2) throw std::invalid_argument("network needs at least 2 outputs");
  auto [jx, jy] = ad::jet_seed(x, y, order);
  const auto out = forward_jets<double>(params, params.values(), jx, jy);
  ad::DerivativeBundle<double> bundle(order);
  for (int i = 0; i < std::min(3, params.output_size()); ++i) {
    bundle.field(i) = out[i] * transform.factor(i).jet(x, y, order);
  }
  return bundle;
}

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  const InputScaling& s = params.input_scaling();
  out << "fvk-network 1\n";
  out << "activation " << to_string(params.activation()) << "\n";
  char buf[64];
  out << "input_scaling";
  for (double v : {s.center_x, s.center_y, s.half_width_x, s.half_width_y}) {
    std::snprintf(buf, sizeof buf, " %a", v);
    out << buf;
  }
  out << "\nlayers";
  for (int p : params.layer_sizes()) out << ' ' << p;
  out << "\nvalues " << params.size() << "\n";
  for (double v : params.values()) {
    std::snprintf(buf, sizeof buf, "%a\n", v);
    out << buf;
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + what);
  };
  auto read_hex = [&](const std::string& token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') fail("bad number '" + token + "'");
    return v;
  };
  std::string line;
  std::string key;
  if (!std::getline(in, line) || line != "fvk-network 1") fail("missing header");

  std::getline(in, line);
  std::istringstream act(line);
  std::string act_name;
  act >> key >> act_name;
  if (key != "activation") fail("expected activation");

  std::getline(in, line);
  std::istringstream sc(line);
  sc >> key;
  if (key != "input_scaling") fail("expected input_scaling");
  std::string t[4];
  sc >> t[0] >> t[1] >> t[2] >> t[3];
  InputScaling scaling{read_hex(t[0]), read_hex(t[1]), read_hex(t[2]), read_hex(t[3])};

  std::getline(in, line);
  std::istringstream ls(line);
  ls >> key;
  if (key != "layers") fail("expected layers");
  std::vector<int> sizes;
  for (int p; ls >> p;) sizes.push_back(p);

  std::size_t count = 0;
  std::getline(in, line);
  std::istringstream vs(line);
  vs >> key >> count;
  if (key != "values") fail("expected values");

  NetworkParams params(sizes, parse_activation(act_name), scaling);
  if (count != params.size()) fail("value count does not match layer sizes");
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) fail("truncated values");
    params.values()[i] = read_hex(line);
  }
  return params;
}

}  // namespace fvk::nn

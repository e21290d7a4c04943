#pragma once

/// @file losses.hpp
/// @brief Data-driven, PDE-residual and total-potential-energy objectives.
///
/// Every loss is a weighted sum of per-point terms. A term evaluates the
/// network jets at its point, records a small "head" (residuals, energy
/// density, boundary work) on a scalar tape over the jet coefficients, and
/// pushes the head's coefficient adjoints back through the network with
/// JetNetworkEvaluator::backward. Terms are reduced in a fixed order.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fvk/losses/problem.hpp"
#include "fvk/network/jet_network.hpp"
#include "fvk/network/network.hpp"
#include "fvk/sampling/sampling.hpp"

namespace fvk::loss {

enum class LossKind { data_driven, pde_based, energy_based };

LossKind parse_loss_kind(const std::string& name);  // data | pde | energy
std::string to_string(LossKind k);

struct LossConfig {
  LossKind kind = LossKind::energy_based;
  double lambda_s = 1.0;
  // Unset: 1 for the PDE loss, C (N/mm) for the energy penalty.
  std::optional<double> lambda_d;
  bool use_displacement = true;
  bool use_force = false;
  double smoothing_eps = 1e-12;
  // PDE loss only: scale residuals by material and plate size. When false
  // residuals enter in N/mm^2, N/mm, mm as they are.
  bool nondimensional = true;

  [[nodiscard]] double effective_lambda_d(const Problem& p) const;
  void validate() const;
};

/// Derivative order a loss needs for a problem.
int required_order(LossKind kind, const Problem& p, const LossConfig& cfg);

/// One labelled point for the data-driven loss.
struct DataPoint {
  double x = 0.0;
  double y = 0.0;
  double ux = 0.0;
  double uy = 0.0;
  double w = 0.0;
  double nxx = 0.0;
  double nyy = 0.0;
  double nxy = 0.0;
};

using Dataset = std::vector<DataPoint>;

/// Loss value, its named parts (already weighted) and, on request, the
/// gradient with respect to the flat parameter vector.
struct LossResult {
  double value = 0.0;
  std::vector<std::pair<std::string, double>> parts;
  std::vector<double> gradient;

  [[nodiscard]] double part(const std::string& name) const;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LossEvaluator {
 public:
  LossEvaluator(const Problem& problem, const LossConfig& cfg, const nn::NetworkParams& shape);

  /// Points of an epoch (PDE and energy losses).
  void set_samples(const sampling::SampleSet& samples);
  /// Labelled points (data-driven loss).
  void set_dataset(const Dataset& data);

  [[nodiscard]] std::size_t term_count() const { return terms_.size(); }
  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] const LossConfig& config() const { return cfg_; }

  /// Full loss, or an unbiased estimate from a subset of term indices (each
  /// term reweighted by term_count / subset size). Throws NonFiniteLoss.
  LossResult evaluate(std::span<const double> values, bool with_gradient,
                      std::span<const std::size_t> subset = {});

 private:
  enum class TermKind { pde_domain, pde_boundary, energy_domain, energy_boundary, data };

  struct Term {
    TermKind kind;
    double x = 0.0;
    double y = 0.0;
    std::array<double, 3> weight{};
    std::size_t condition = 0;  // index into problem_.conditions
    plate::BoundaryFrame frame;
    std::size_t data_index = 0;
  };

  double evaluate_term(const Term& t, std::span<const double> values, double scale, bool with_gradient,
                       std::array<double, 3>& parts, std::span<double> grad);

  Problem problem_;
  LossConfig cfg_;
  nn::NetworkParams shape_;
  nn::JetNetworkEvaluator evaluator_;
  int order_ = 0;
  std::map<std::string, double> vars_;
  std::array<std::string, 3> part_names_;
  std::vector<Term> terms_;
  Dataset data_;
  std::array<double, 3> force_rms_{1.0, 1.0, 1.0};
  std::vector<ad::Jet2<double>> adjoint_;
};

// Convenience wrappers over LossEvaluator.
LossResult data_driven_loss(const nn::NetworkParams& params, const Dataset& data, const Problem& problem,
                            const LossConfig& cfg, bool with_gradient = false);
LossResult pde_loss(const nn::NetworkParams& params, const sampling::SampleSet& samples, const Problem& problem,
                    const LossConfig& cfg, bool with_gradient = false);
LossResult energy_loss(const nn::NetworkParams& params, const sampling::SampleSet& samples, const Problem& problem,
                       const LossConfig& cfg, bool with_gradient = false);

/// Per-point deviation of the kinematic primaries, smoothed so the gradient
/// exists at zero: sqrt(sum dev^2 + eps^2) - eps.
template <class T>
T smoothed_norm(const T& sum_sq, double eps) {
  using std::sqrt;
  return sqrt(sum_sq + eps * eps) - eps;
}

}  // namespace fvk::loss

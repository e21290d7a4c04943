#pragma once

/// @file training.hpp
/// @brief Gradient-based minimization of a loss over the network parameters.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fvk/losses/losses.hpp"
#include "fvk/network/network.hpp"
#include "fvk/sampling/sampling.hpp"

namespace fvk::train {

struct Stage {
  double learning_rate = 1e-3;
  int epochs = 1;
};

using Schedule = std::vector<Stage>;

int total_epochs(const Schedule& s);

/// Piecewise-constant rate; throws std::out_of_range past the last stage.
double lr_at(const Schedule& s, int epoch);

/// 1e-3 x 3000, 1e-4 x 6000, 1e-5 x 3000.
Schedule paper_schedule();

enum class Optimizer { adam, sgd };

class Adam {
 public:
  explicit Adam(std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::span<double> values, std::span<const double> grad, double lr);
  [[nodiscard]] long steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

struct TrainingConfig {
  Schedule schedule = paper_schedule();
  Optimizer optimizer = Optimizer::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double momentum = 0.0;       // sgd only
  std::size_t batch_size = 0;  // 0: the whole set in one step
  std::uint64_t seed = 1;      // mini-batch order
  int log_every = 0;           // progress line period, 0 = silent
  std::ostream* log = nullptr;
  int metrics_every = 0;       // period of the metrics callback, 0 = never
  std::function<std::vector<std::pair<std::string, double>>(const nn::NetworkParams&)> metrics;
  // Applied to every gradient before the step, e.g. to freeze parameters.
  std::function<void(std::span<double>)> gradient_filter;

  void validate(loss::LossKind kind) const;
};

struct HistoryEntry {
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct MetricsEntry {
  int epoch = 0;
  std::vector<std::pair<std::string, double>> values;
};

struct TrainingHistory {
  std::vector<HistoryEntry> epochs;
  std::vector<MetricsEntry> checkpoints;
  int best_epoch = -1;
  double best_loss = 0.0;

  /// epoch,loss,lr with round-trip precision.
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainingResult {
  nn::NetworkParams params;       // after the last step
  nn::NetworkParams best_params;  // parameters that produced best_loss
  TrainingHistory history;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, const std::string& what) : std::runtime_error(what), epoch_(epoch) {}
  [[nodiscard]] int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// A loss as seen by the optimizer: optionally refreshed every epoch, made
/// of `term_count()` terms that mini-batches may subsample.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual void begin_epoch(int epoch) { (void)epoch; }
  [[nodiscard]] virtual std::size_t term_count() const = 0;
  virtual loss::LossResult evaluate(std::span<const double> values, bool with_gradient,
                                    std::span<const std::size_t> subset) = 0;
};

/// The generic loop. The epoch loss is the full-batch value, or the mean of
/// the mini-batch estimates of that epoch. Throws DivergenceError.
TrainingResult minimize(nn::NetworkParams params, Objective& objective, const TrainingConfig& cfg);

/// PDE or energy loss, resampled every epoch from `plan`.
TrainingResult train(nn::NetworkParams params, const loss::Problem& problem, const loss::LossConfig& loss_cfg,
                     const sampling::SamplingPlan& plan, const TrainingConfig& cfg);

/// Data-driven loss on a fixed dataset.
TrainingResult train_data(nn::NetworkParams params, const loss::Problem& problem, const loss::LossConfig& loss_cfg,
                          const loss::Dataset& data, const TrainingConfig& cfg);

/// Displacement profile (u_x, u_y, w) used as a pre-training target.
using Profile = std::function<std::array<double, 3>(double x, double y)>;

/// Fits the network to `target` on `points` uniform samples by the
/// displacement-only data loss.
TrainingResult pretrain_fit(nn::NetworkParams params, const loss::Problem& problem, const Profile& target,
                            int points, const TrainingConfig& cfg, std::uint64_t seed = 1);

struct BucklingResult {
  TrainingResult training;
  nn::NetworkParams trivial;  // best state with w == 0 found from the same start
  double energy = 0.0;        // energy of the trained state on the check sample
  double trivial_energy = 0.0;
  double max_deflection = 0.0;
  // Only when the trained state came out flat: energy after restarting from
  // it with a perturbed deflection output.
  std::optional<double> restart_energy;
  bool trivial_suspect = false;  // flat result although the restart found a lower buckled state
};

struct BucklingConfig {
  TrainingConfig pretrain;
  int pretrain_points = 2000;
  TrainingConfig train;
  TrainingConfig trivial;   // in-plane only restart with w frozen at zero
  int check_samples = 100000;
  std::uint64_t check_seed = 99;
};

/// Pre-fits `init_mode`, minimizes the energy, then compares with the
/// trivial flat state on a common sample.
BucklingResult train_buckling(nn::NetworkParams params, const loss::Problem& problem,
                              const loss::LossConfig& loss_cfg, const sampling::SamplingPlan& plan,
                              const Profile& init_mode, const BucklingConfig& cfg);

/// Sets the output-layer weights and bias of output `index` to zero.
void zero_output(nn::NetworkParams& params, int index);

}  // namespace fvk::train

#include "fvk/training/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fvk/util/random.hpp"

namespace fvk::train {

int total_epochs(const Schedule& s) {
  int n = 0;
  for (const Stage& st : s) n += st.epochs;
  return n;
}

double lr_at(const Schedule& s, int epoch) {
  if (epoch < 0) throw std::out_of_range("lr_at: negative epoch");
  int start = 0;
  for (const Stage& st : s) {
    if (epoch < start + st.epochs) return st.learning_rate;
    start += st.epochs;
  }
  throw std::out_of_range("lr_at: epoch " + std::to_string(epoch) + " beyond the schedule (" +
                          std::to_string(start) + " epochs)");
}

Schedule paper_schedule() { return {{1e-3, 3000}, {1e-4, 6000}, {1e-5, 3000}}; }

Adam::Adam(std::size_t n, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> values, std::span<const double> grad, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < values.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    values[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

void TrainingConfig::validate(loss::LossKind kind) const {
  if (schedule.empty()) throw std::invalid_argument("training: empty learning-rate schedule");
  for (const Stage& s : schedule) {
    if (s.epochs < 1) throw std::invalid_argument("training: stage epoch counts must be positive");
    if (!(s.learning_rate > 0.0)) throw std::invalid_argument("training: learning rates must be positive");
  }
  if (kind == loss::LossKind::energy_based && batch_size != 0) {
    throw std::invalid_argument("training: the energy loss is minimized with the full sample set (batch_size = 0)");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("training: adam betas must lie in [0, 1)");
  }
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("training: momentum must lie in [0, 1)");
}

void TrainingHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,loss,lr\n" << std::setprecision(17);
  for (const HistoryEntry& e : epochs) out << e.epoch << ',' << e.loss << ',' << e.lr << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string snapshot(int epoch, double last_loss, std::span<const double> values, const std::string& cause) {
  std::ostringstream s;
  s << "training diverged at epoch " << epoch << ": " << cause << " (last finite loss " << last_loss
    << ", parameter norm " << norm(values) << ")";
  return s.str();
}

bool same_geometry(const sampling::Geometry& a, const sampling::Geometry& b) {
  auto rect = [](const sampling::Rect& r) { return std::array<double, 4>{r.x_min, r.x_max, r.y_min, r.y_max}; };
  if (rect(a.outer) != rect(b.outer) || a.holes.size() != b.holes.size()) return false;
  for (std::size_t i = 0; i < a.holes.size(); ++i) {
    const auto& p = a.holes[i];
    const auto& q = b.holes[i];
    if (p.cx != q.cx || p.cy != q.cy || p.ax != q.ax || p.ay != q.ay) return false;
  }
  return true;
}

class SampledObjective : public Objective {
 public:
  SampledObjective(const loss::Problem& p, const loss::LossConfig& c, const nn::NetworkParams& shape,
                   const sampling::SamplingPlan& plan)
      : evaluator_(p, c, shape), plan_(plan) {
    plan_.validate();
  }
  void begin_epoch(int epoch) override {
    if (plan_.frozen && loaded_) return;
    evaluator_.set_samples(sampling::resample_epoch(plan_, epoch));
    loaded_ = true;
  }
  [[nodiscard]] std::size_t term_count() const override { return evaluator_.term_count(); }
  loss::LossResult evaluate(std::span<const double> values, bool with_gradient,
                            std::span<const std::size_t> subset) override {
    return evaluator_.evaluate(values, with_gradient, subset);
  }

 private:
  loss::LossEvaluator evaluator_;
  sampling::SamplingPlan plan_;
  bool loaded_ = false;
};

class DataObjective : public Objective {
 public:
  DataObjective(const loss::Problem& p, const loss::LossConfig& c, const nn::NetworkParams& shape,
                const loss::Dataset& data)
      : evaluator_(p, c, shape) {
    evaluator_.set_dataset(data);
  }
  [[nodiscard]] std::size_t term_count() const override { return evaluator_.term_count(); }
  loss::LossResult evaluate(std::span<const double> values, bool with_gradient,
                            std::span<const std::size_t> subset) override {
    return evaluator_.evaluate(values, with_gradient, subset);
  }

 private:
  loss::LossEvaluator evaluator_;
};

}  // namespace

TrainingResult minimize(nn::NetworkParams params, Objective& objective, const TrainingConfig& cfg) {
  if (cfg.schedule.empty()) throw std::invalid_argument("training: empty learning-rate schedule");
  const int total = total_epochs(cfg.schedule);
  std::vector<double>& values = params.values();
  const std::size_t n = values.size();
  Adam adam(n, cfg.beta1, cfg.beta2, cfg.adam_eps);
  std::vector<double> velocity(n, 0.0);

  TrainingResult result;
  result.best_params = params;
  result.history.epochs.reserve(total);
  result.history.best_loss = std::numeric_limits<double>::infinity();
  double last_loss = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> order;

  auto step = [&](std::vector<double>& grad, double lr) {
    if (cfg.gradient_filter) cfg.gradient_filter(grad);
    if (cfg.optimizer == Optimizer::adam) {
      adam.step(values, grad, lr);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        velocity[i] = cfg.momentum * velocity[i] + grad[i];
        values[i] -= lr * velocity[i];
      }
    }
  };

  for (int epoch = 0; epoch < total; ++epoch) {
    const double lr = lr_at(cfg.schedule, epoch);
    objective.begin_epoch(epoch);
    const std::size_t terms = objective.term_count();
    double epoch_loss = 0.0;
    try {
      if (cfg.batch_size == 0 || cfg.batch_size >= terms) {
        loss::LossResult r = objective.evaluate(values, true, {});
        if (!all_finite(r.gradient)) throw loss::NonFiniteLoss("non-finite gradient");
        epoch_loss = r.value;
        if (epoch_loss < result.history.best_loss) {
          result.history.best_loss = epoch_loss;
          result.history.best_epoch = epoch;
          result.best_params.values() = values;
        }
        step(r.gradient, lr);
      } else {
        order.resize(terms);
        std::iota(order.begin(), order.end(), std::size_t{0});
        util::Rng rng(util::derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch), 7));
        for (std::size_t i = terms - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        for (std::size_t b = 0; b < terms; b += cfg.batch_size) {
          const std::size_t e = std::min(terms, b + cfg.batch_size);
          const std::span<const std::size_t> batch(order.data() + b, e - b);
          loss::LossResult r = objective.evaluate(values, true, batch);
          if (!all_finite(r.gradient)) throw loss::NonFiniteLoss("non-finite gradient");
          epoch_loss += r.value * static_cast<double>(e - b) / static_cast<double>(terms);
          step(r.gradient, lr);
        }
        if (!all_finite(values)) throw loss::NonFiniteLoss("non-finite parameters");
        if (epoch_loss < result.history.best_loss) {
          result.history.best_loss = epoch_loss;
          result.history.best_epoch = epoch;
          result.best_params.values() = values;
        }
      }
    } catch (const loss::NonFiniteLoss& e) {
      throw DivergenceError(epoch, snapshot(epoch, last_loss, values, e.what()));
    }
    last_loss = epoch_loss;
    result.history.epochs.push_back({epoch, epoch_loss, lr});
    if (cfg.log != nullptr && cfg.log_every > 0 && (epoch % cfg.log_every == 0 || epoch + 1 == total)) {
      *cfg.log << "epoch " << epoch << " loss " << std::setprecision(8) << epoch_loss << " lr " << lr << '\n';
    }
    if (cfg.metrics && cfg.metrics_every > 0 && ((epoch + 1) % cfg.metrics_every == 0 || epoch + 1 == total)) {
      result.history.checkpoints.push_back({epoch, cfg.metrics(params)});
    }
  }
  result.params = std::move(params);
  return result;
}

TrainingResult train(nn::NetworkParams params, const loss::Problem& problem, const loss::LossConfig& loss_cfg,
                     const sampling::SamplingPlan& plan, const TrainingConfig& cfg) {
  cfg.validate(loss_cfg.kind);
  if (loss_cfg.kind == loss::LossKind::data_driven) {
    throw std::invalid_argument("train: the data-driven loss needs a dataset (train_data)");
  }
  if (!same_geometry(plan.geometry, problem.geometry)) {
    throw std::invalid_argument("train: sampling plan and problem have different geometries");
  }
  SampledObjective objective(problem, loss_cfg, params, plan);
  return minimize(std::move(params), objective, cfg);
}

TrainingResult train_data(nn::NetworkParams params, const loss::Problem& problem, const loss::LossConfig& loss_cfg,
                          const loss::Dataset& data, const TrainingConfig& cfg) {
  cfg.validate(loss_cfg.kind);
  if (loss_cfg.kind != loss::LossKind::data_driven) throw std::invalid_argument("train_data: needs the data loss");
  DataObjective objective(problem, loss_cfg, params, data);
  return minimize(std::move(params), objective, cfg);
}

TrainingResult pretrain_fit(nn::NetworkParams params, const loss::Problem& problem, const Profile& target,
                            int points, const TrainingConfig& cfg, std::uint64_t seed) {
  util::Rng rng(seed);
  loss::Dataset data;
  for (const sampling::Point& p : sampling::sample_domain(problem.geometry, points, rng)) {
    const auto u = target(p.x, p.y);
    data.push_back({p.x, p.y, u[0], u[1], u[2], 0.0, 0.0, 0.0});
  }
  loss::LossConfig c;
  c.kind = loss::LossKind::data_driven;
  c.use_displacement = true;
  c.use_force = false;
  return train_data(std::move(params), problem, c, data, cfg);
}

void zero_output(nn::NetworkParams& params, int index) {
  const int last = params.layer_count();
  for (int i = 0; i < params.width(last - 1); ++i) params.weight(last, i, index) = 0.0;
  params.bias(last, index) = 0.0;
}

namespace {

double max_abs_deflection(const nn::NetworkParams& params, const loss::Problem& problem) {
  const auto& r = problem.geometry.outer;
  double m = 0.0;
  const int n = 101;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = r.x_min + r.width() * i / (n - 1);
      const double y = r.y_min + r.height() * j / (n - 1);
      if (!problem.geometry.contains(x, y)) continue;
      const auto raw = nn::forward(params, x, y);
      m = std::max(m, std::fabs(nn::apply_transform(raw, problem.transform, x, y)[2]));
    }
  }
  return m;
}

}  // namespace

BucklingResult train_buckling(nn::NetworkParams params, const loss::Problem& problem,
                              const loss::LossConfig& loss_cfg, const sampling::SamplingPlan& plan,
                              const Profile& init_mode, const BucklingConfig& cfg) {
  if (!problem.bending()) throw std::invalid_argument("train_buckling: needs a three-output problem");
  if (!problem.pressure.is_constant_zero()) {
    throw std::invalid_argument("train_buckling: transverse pressure must be zero");
  }
  if (loss_cfg.kind != loss::LossKind::energy_based) {
    throw std::invalid_argument("train_buckling: buckled states are found by the energy loss");
  }
  BucklingResult out;
  TrainingResult pre = pretrain_fit(std::move(params), problem, init_mode, cfg.pretrain_points, cfg.pretrain);
  out.training = train(std::move(pre.params), problem, loss_cfg, plan, cfg.train);

  const int last = out.training.params.layer_count();
  const std::size_t width = static_cast<std::size_t>(out.training.params.width(last - 1));
  const std::size_t w_offset = out.training.params.weight_offset(last);
  const std::size_t b_offset = out.training.params.bias_offset(last);
  auto freeze_w = [=](std::span<double> g) {
    for (std::size_t i = 0; i < width; ++i) g[w_offset + i * 3 + 2] = 0.0;
    g[b_offset + 2] = 0.0;
  };

  // Flat competitor: same in-plane start, deflection output pinned to zero.
  nn::NetworkParams flat = out.training.params;
  zero_output(flat, 2);
  TrainingConfig tc = cfg.trivial;
  tc.gradient_filter = freeze_w;
  out.trivial = train(std::move(flat), problem, loss_cfg, plan, tc).params;

  sampling::SamplingPlan check = plan;
  check.domain_count = cfg.check_samples;
  check.boundary_count = std::max(plan.boundary_count, cfg.check_samples / 10);
  check.seed = cfg.check_seed;
  check.refinement.enabled = false;
  const sampling::SampleSet common = sampling::resample_epoch(check, 0);
  out.energy = loss::energy_loss(out.training.params, common, problem, loss_cfg).value;
  out.trivial_energy = loss::energy_loss(out.trivial, common, problem, loss_cfg).value;
  out.max_deflection = max_abs_deflection(out.training.params, problem);

  if (out.max_deflection < 1e-3 * problem.material.h) {
    // Flat result: restart with a perturbed deflection output and see whether
    // a buckled state with lower energy exists.
    nn::NetworkParams kick = out.training.params;
    util::Rng rng(util::derive_seed(cfg.check_seed, 1, 2));
    for (std::size_t i = 0; i < width; ++i) kick.values()[w_offset + i * 3 + 2] = rng.uniform(-0.5, 0.5);
    const TrainingResult again = train(std::move(kick), problem, loss_cfg, plan, cfg.train);
    out.restart_energy = loss::energy_loss(again.params, common, problem, loss_cfg).value;
    const double tol = 1e-6 * std::max(1.0, std::fabs(out.energy));
    out.trivial_suspect = *out.restart_energy < out.energy - tol &&
                          max_abs_deflection(again.params, problem) >= 1e-3 * problem.material.h;
  }
  return out;
}

}  // namespace fvk::train

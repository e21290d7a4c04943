#include "fvk/losses/losses.hpp"

#include <cmath>
#include <sstream>

#include "fvk/autodiff/bundle.hpp"
#include "fvk/autodiff/tape.hpp"

namespace fvk::loss {

using ad::Jet2;
using ad::Var;

LossKind parse_loss_kind(const std::string& name) {
  if (name == "data" || name == "data_driven") return LossKind::data_driven;
  if (name == "pde" || name == "pde_based") return LossKind::pde_based;
  if (name == "energy" || name == "energy_based") return LossKind::energy_based;
  throw std::invalid_argument("unknown loss kind '" + name + "' (expected data, pde or energy)");
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::data_driven:
      return "data";
    case LossKind::pde_based:
      return "pde";
    case LossKind::energy_based:
      return "energy";
  }
  return "?";
}

double LossConfig::effective_lambda_d(const Problem& p) const {
  if (lambda_d) return *lambda_d;
  return kind == LossKind::energy_based ? p.material.C() : 1.0;
}

void LossConfig::validate() const {
  if (!(lambda_s >= 0.0)) throw std::invalid_argument("loss: lambda_s must be >= 0");
  if (lambda_d && !(*lambda_d >= 0.0)) throw std::invalid_argument("loss: lambda_d must be >= 0");
  if (!(smoothing_eps > 0.0)) throw std::invalid_argument("loss: smoothing eps must be positive");
  if (kind == LossKind::data_driven && !use_displacement && !use_force) {
    throw std::invalid_argument("loss: data-driven loss needs at least one data field");
  }
}

int required_order(LossKind kind, const Problem& p, const LossConfig& cfg) {
  switch (kind) {
    case LossKind::data_driven:
      return cfg.use_force ? 1 : 0;
    case LossKind::pde_based:
      return p.bending() ? 4 : 2;
    case LossKind::energy_based:
      return p.bending() ? 2 : 1;
  }
  return 0;
}

double LossResult::part(const std::string& name) const {
  for (const auto& [n, v] : parts) {
    if (n == name) return v;
  }
  throw std::out_of_range("loss has no part '" + name + "'");
}

namespace {

bool identity_factor(const nn::OutputFactor& f) { return f.scale == 1.0 && f.factors.empty(); }

template <class T>
T square(const T& v) {
  return v * v;
}

}  // namespace

LossEvaluator::LossEvaluator(const Problem& problem, const LossConfig& cfg, const nn::NetworkParams& shape)
    : problem_(problem), cfg_(cfg), shape_(shape), evaluator_(shape) {
  problem_.validate();
  cfg_.validate();
  if (shape.input_size() != 2) throw std::invalid_argument("loss: network must take (x, y)");
  if (shape.output_size() != problem_.outputs) {
    throw std::invalid_argument("loss: network has " + std::to_string(shape.output_size()) +
                                " outputs, problem needs " + std::to_string(problem_.outputs));
  }
  order_ = required_order(cfg_.kind, problem_, cfg_);
  if (order_ >= 2 && shape.activation() == nn::Activation::relu) {
    throw std::invalid_argument("loss: relu activation has no usable second derivatives");
  }
  vars_ = problem_.expression_variables();
  switch (cfg_.kind) {
    case LossKind::data_driven:
      part_names_ = {"displacement", "force", "unused"};
      break;
    case LossKind::pde_based:
      part_names_ = {"pde", "bc_static", "bc_kinematic"};
      break;
    case LossKind::energy_based:
      part_names_ = {"internal", "external", "penalty"};
      break;
  }
  adjoint_.assign(problem_.outputs, Jet2<double>(order_));
}

void LossEvaluator::set_samples(const sampling::SampleSet& samples) {
  if (cfg_.kind == LossKind::data_driven) throw std::logic_error("loss: data-driven loss takes a dataset");
  terms_.clear();
  const std::size_t n_domain = samples.domain_count();
  if (n_domain == 0) throw std::invalid_argument("loss: empty domain sample set");
  const double lambda_d = cfg_.effective_lambda_d(problem_);
  const int pairs = problem_.active_pairs();

  for (const sampling::DomainRegion& r : samples.regions) {
    if (r.points.empty()) continue;
    Term t{};
    if (cfg_.kind == LossKind::pde_based) {
      t.kind = TermKind::pde_domain;
      t.weight = {1.0 / static_cast<double>(n_domain), 0.0, 0.0};
    } else {
      t.kind = TermKind::energy_domain;
      const double w = r.area / static_cast<double>(r.points.size());
      t.weight = {w, w, 0.0};
    }
    for (const sampling::Point& p : r.points) {
      t.x = p.x;
      t.y = p.y;
      terms_.push_back(t);
    }
  }

  // Energy penalty: one mean over every point of a segment with a kinematic pair.
  std::size_t q_bd = 0;
  for (const sampling::SegmentSamples& s : samples.segments) {
    const SegmentCondition& c = problem_.condition(s.name);
    bool any = false;
    for (int p = 0; p < pairs; ++p) any = any || c.pairs[p].kinematic;
    if (any) q_bd += s.points.size();
  }

  for (const sampling::SegmentSamples& s : samples.segments) {
    if (s.points.empty()) continue;
    const SegmentCondition& c = problem_.condition(s.name);
    bool any_kinematic = false;
    bool any_static = false;
    for (int p = 0; p < pairs; ++p) {
      any_kinematic = any_kinematic || c.pairs[p].kinematic;
      any_static = any_static || !c.pairs[p].kinematic;
    }
    const double q = static_cast<double>(s.points.size());
    Term t{};
    t.condition = static_cast<std::size_t>(&c - problem_.conditions.data());
    if (cfg_.kind == LossKind::pde_based) {
      t.kind = TermKind::pde_boundary;
      t.weight = {0.0, any_static ? cfg_.lambda_s / q : 0.0, any_kinematic ? lambda_d / q : 0.0};
    } else {
      t.kind = TermKind::energy_boundary;
      t.weight = {0.0, any_static ? s.length / q : 0.0,
                  any_kinematic && q_bd > 0 ? lambda_d / static_cast<double>(q_bd) : 0.0};
    }
    for (const sampling::BoundarySample& b : s.points) {
      t.x = b.x;
      t.y = b.y;
      t.frame = b.frame;
      terms_.push_back(t);
    }
  }
}

void LossEvaluator::set_dataset(const Dataset& data) {
  if (cfg_.kind != LossKind::data_driven) throw std::logic_error("loss: only the data-driven loss takes a dataset");
  if (data.empty()) throw std::invalid_argument("loss: empty dataset");
  data_ = data;
  terms_.clear();
  const double n = static_cast<double>(data_.size());
  std::array<double, 3> sum_sq{};
  for (const DataPoint& p : data_) {
    sum_sq[0] += p.nxx * p.nxx;
    sum_sq[1] += p.nyy * p.nyy;
    sum_sq[2] += p.nxy * p.nxy;
  }
  for (int k = 0; k < 3; ++k) {
    const double rms = std::sqrt(sum_sq[k] / n);
    force_rms_[k] = rms > 0.0 ? rms : 1.0;
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    Term t{};
    t.kind = TermKind::data;
    t.x = data_[i].x;
    t.y = data_[i].y;
    t.weight = {1.0 / n, 1.0 / n, 0.0};
    t.data_index = i;
    terms_.push_back(t);
  }
}

double LossEvaluator::evaluate_term(const Term& t, std::span<const double> values, double scale,
                                    bool with_gradient, std::array<double, 3>& parts, std::span<double> grad) {
  thread_local ad::Tape tape;
  tape.clear();
  ad::Tape::Scope scope(tape);

  const auto& raw = evaluator_.forward(values, t.x, t.y, order_);
  const int n_out = problem_.outputs;
  const int size = ad::jet_size(order_);
  std::array<std::array<std::int32_t, ad::kMaxJetSize>, 3> index{};

  ad::DerivativeBundle<Var> d(order_);
  for (int i = 0; i < n_out; ++i) {
    Jet2<Var> j(order_);
    for (int c = 0; c < size; ++c) {
      j[c] = tape.variable(raw[i][c]);
      index[i][c] = j[c].index();
    }
    const nn::OutputFactor& f = problem_.transform.factor(i);
    if (!identity_factor(f)) {
      const Jet2<double> fj = f.jet(t.x, t.y, order_);
      Jet2<Var> fv(order_);
      for (int c = 0; c < size; ++c) fv[c] = Var(fj[c]);
      j = j * fv;
    }
    d.field(i) = j;
  }

  const plate::PlateMaterial& m = problem_.material;
  const double ell = problem_.length_scale();
  const bool nd = cfg_.nondimensional;
  std::array<Var, 3> head{Var(0.0), Var(0.0), Var(0.0)};

  switch (t.kind) {
    case TermKind::pde_domain: {
      const double q = problem_.pressure(t.x, t.y, vars_);
      const plate::Residuals<Var> r = plate::pde_residuals(m, d, q);
      const double sp = nd ? ell / m.C() : 1.0;
      head[0] = square(r.px * sp) + square(r.py * sp);
      if (r.has_pz) head[0] = head[0] + square(r.pz * (nd ? ell * ell * ell / m.D() : 1.0));
      break;
    }
    case TermKind::pde_boundary: {
      const plate::LocalResultants<Var> lr = plate::boundary_resultants_local(m, d, t.frame);
      const plate::LocalDisplacements<Var> ld = plate::local_displacements(d, t.frame);
      const std::array<Var, 4> resultant{lr.n_nn, lr.n_ns, lr.v_n, lr.m_nn};
      const std::array<Var, 4> primary{ld.u_n, ld.u_s, ld.w, ld.w_n};
      const std::array<double, 4> s_static{nd ? 1.0 / m.C() : 1.0, nd ? 1.0 / m.C() : 1.0,
                                           nd ? ell * ell / m.D() : 1.0, nd ? ell / m.D() : 1.0};
      const std::array<double, 4> s_kin{nd ? 1.0 / ell : 1.0, nd ? 1.0 / ell : 1.0, nd ? 1.0 / ell : 1.0, 1.0};
      for (int p = 0; p < problem_.active_pairs(); ++p) {
        const PairCondition& pc = problem_.conditions[t.condition].pairs[p];
        const double target = pc.value(t.x, t.y, vars_);
        if (pc.kinematic) {
          head[2] = head[2] + square((primary[p] - target) * s_kin[p]);
        } else {
          head[1] = head[1] + square((resultant[p] - target) * s_static[p]);
        }
      }
      break;
    }
    case TermKind::energy_domain: {
      head[0] = plate::energy_density(m, d, problem_.bending());
      if (problem_.bending()) head[1] = -problem_.pressure(t.x, t.y, vars_) * d.w.value();
      break;
    }
    case TermKind::energy_boundary: {
      const plate::LocalDisplacements<Var> ld = plate::local_displacements(d, t.frame);
      const std::array<Var, 4> primary{ld.u_n, ld.u_s, ld.w, ld.w_n};
      // work of prescribed resultants on their conjugates; the rotation
      // pair is (M_nn, -w_,n)
      const std::array<double, 4> sign{-1.0, -1.0, -1.0, 1.0};
      Var dev_sq(0.0);
      bool any_kinematic = false;
      for (int p = 0; p < problem_.active_pairs(); ++p) {
        const PairCondition& pc = problem_.conditions[t.condition].pairs[p];
        const double target = pc.value(t.x, t.y, vars_);
        if (pc.kinematic) {
          dev_sq = dev_sq + square(primary[p] - target);
          any_kinematic = true;
        } else if (target != 0.0) {
          head[1] = head[1] + primary[p] * (sign[p] * target);
        }
      }
      if (any_kinematic) head[2] = smoothed_norm(dev_sq, cfg_.smoothing_eps);
      break;
    }
    case TermKind::data: {
      const DataPoint& dp = data_[t.data_index];
      if (cfg_.use_displacement) {
        head[0] = square(d.ux.value() - dp.ux) + square(d.uy.value() - dp.uy);
        if (problem_.bending()) head[0] = head[0] + square(d.w.value() - dp.w);
      }
      if (cfg_.use_force) {
        const plate::Tensor2<Var> n = plate::isotropic(m.C(), m.nu, plate::membrane_strains(d));
        head[1] = square((n.xx - dp.nxx) / force_rms_[0]) + square((n.yy - dp.nyy) / force_rms_[1]) +
                  square((n.xy - dp.nxy) / force_rms_[2]);
      }
      break;
    }
  }

  Var total(0.0);
  for (int k = 0; k < 3; ++k) {
    if (t.weight[k] == 0.0) continue;
    parts[k] += scale * t.weight[k] * head[k].value();
    total = total + head[k] * (scale * t.weight[k]);
  }
  if (with_gradient && !total.is_constant()) {
    const std::vector<double>& adj = tape.backward(total);
    bool nonzero = false;
    for (int i = 0; i < n_out; ++i) {
      for (int c = 0; c < size; ++c) {
        adjoint_[i][c] = adj[index[i][c]];
        nonzero = nonzero || adjoint_[i][c] != 0.0;
      }
    }
    if (nonzero) evaluator_.backward(values, adjoint_, grad);
  }
  return total.value();
}

LossResult LossEvaluator::evaluate(std::span<const double> values, bool with_gradient,
                                   std::span<const std::size_t> subset) {
  if (values.size() != shape_.size()) throw std::invalid_argument("loss: parameter vector has the wrong size");
  if (terms_.empty()) throw std::logic_error("loss: no sample points set");
  LossResult result;
  if (with_gradient) result.gradient.assign(values.size(), 0.0);
  std::array<double, 3> parts{};
  double total = 0.0;

  auto run = [&](std::size_t i, double scale) {
    const double v = evaluate_term(terms_[i], values, scale, with_gradient, parts, result.gradient);
    total += v;
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite " << to_string(cfg_.kind) << " loss term at (" << terms_[i].x << ", " << terms_[i].y << ")";
      throw NonFiniteLoss(msg.str());
    }
  };
  if (subset.empty()) {
    for (std::size_t i = 0; i < terms_.size(); ++i) run(i, 1.0);
  } else {
    const double scale = static_cast<double>(terms_.size()) / static_cast<double>(subset.size());
    for (std::size_t i : subset) {
      if (i >= terms_.size()) throw std::out_of_range("loss: subset index out of range");
      run(i, scale);
    }
  }
  result.value = total;
  for (int k = 0; k < 3; ++k) {
    if (part_names_[k] != "unused") result.parts.emplace_back(part_names_[k], parts[k]);
  }
  return result;
}

LossResult data_driven_loss(const nn::NetworkParams& params, const Dataset& data, const Problem& problem,
                            const LossConfig& cfg, bool with_gradient) {
  LossConfig c = cfg;
  c.kind = LossKind::data_driven;
  LossEvaluator e(problem, c, params);
  e.set_dataset(data);
  return e.evaluate(params.values(), with_gradient);
}

LossResult pde_loss(const nn::NetworkParams& params, const sampling::SampleSet& samples, const Problem& problem,
                    const LossConfig& cfg, bool with_gradient) {
  LossConfig c = cfg;
  c.kind = LossKind::pde_based;
  LossEvaluator e(problem, c, params);
  e.set_samples(samples);
  return e.evaluate(params.values(), with_gradient);
}

LossResult energy_loss(const nn::NetworkParams& params, const sampling::SampleSet& samples, const Problem& problem,
                       const LossConfig& cfg, bool with_gradient) {
  LossConfig c = cfg;
  c.kind = LossKind::energy_based;
  LossEvaluator e(problem, c, params);
  e.set_samples(samples);
  return e.evaluate(params.values(), with_gradient);
}

}  // namespace fvk::loss

#include "fvk/autodiff/tape.hpp"

#include <stdexcept>

namespace fvk::ad {

namespace {
thread_local Tape* g_active = nullptr;
}

Tape::Scope::Scope(Tape& tape) : previous_(g_active) { g_active = &tape; }
Tape::Scope::~Scope() { g_active = previous_; }

Tape* Tape::active() {
  if (g_active == nullptr) throw std::logic_error("no active tape on this thread");
  return g_active;
}

Var Tape::variable(double v) {
  nodes_.push_back({{-1, -1}, {0.0, 0.0}});
  return Var::make(v, static_cast<std::int32_t>(nodes_.size() - 1));
}

Var Tape::unary(double v, const Var& a, double da) {
  nodes_.push_back({{a.index(), -1}, {da, 0.0}});
  return Var::make(v, static_cast<std::int32_t>(nodes_.size() - 1));
}

Var Tape::binary(double v, const Var& a, double da, const Var& b, double db) {
  nodes_.push_back({{a.index(), b.index()}, {da, db}});
  return Var::make(v, static_cast<std::int32_t>(nodes_.size() - 1));
}

const std::vector<double>& Tape::backward(const Var& out) {
  adjoint_.assign(nodes_.size(), 0.0);
  if (out.is_constant()) return adjoint_;
  adjoint_[out.index()] = 1.0;
  for (std::int64_t i = out.index(); i >= 0; --i) {
    const double adj = adjoint_[i];
    if (adj == 0.0) continue;
    const Node& n = nodes_[i];
    if (n.parent[0] >= 0) adjoint_[n.parent[0]] += adj * n.partial[0];
    if (n.parent[1] >= 0) adjoint_[n.parent[1]] += adj * n.partial[1];
  }
  return adjoint_;
}

ValueAndGradient gradient(const std::function<Var(std::span<const Var>)>& f, std::span<const double> x) {
  Tape tape;
  Tape::Scope scope(tape);
  std::vector<Var> inputs;
  inputs.reserve(x.size());
  for (double v : x) inputs.push_back(tape.variable(v));
  const Var out = f(inputs);
  ValueAndGradient result;
  result.value = out.value();
  const auto& adj = tape.backward(out);
  result.gradient.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) result.gradient[i] = adj[inputs[i].index()];
  return result;
}

}  // namespace fvk::ad

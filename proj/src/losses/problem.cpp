#include "fvk/losses/problem.hpp"

#include <algorithm>
#include <stdexcept>

namespace fvk::loss {

const char* pair_name(Pair p) {
  switch (p) {
    case Pair::normal:
      return "normal";
    case Pair::tangential:
      return "tangential";
    case Pair::deflection:
      return "deflection";
    case Pair::rotation:
      return "rotation";
  }
  return "?";
}

double Problem::length_scale() const { return std::max(geometry.outer.width(), geometry.outer.height()); }

std::map<std::string, double> Problem::expression_variables() const {
  std::map<std::string, double> v = variables;
  v["h"] = material.h;
  v["E"] = material.E;
  v["nu"] = material.nu;
  v["C"] = material.C();
  v["D"] = material.D();
  return v;
}

const SegmentCondition& Problem::condition(const std::string& segment) const {
  for (const SegmentCondition& c : conditions) {
    if (c.segment == segment) return c;
  }
  throw std::invalid_argument("no boundary condition for segment '" + segment + "'");
}

void Problem::validate() const {
  material.validate();
  geometry.validate();
  if (outputs != 2 && outputs != 3) throw std::invalid_argument("problem: outputs must be 2 or 3");
  const std::vector<std::string> names = geometry.segment_names();
  for (const std::string& n : names) {
    const auto count = std::count_if(conditions.begin(), conditions.end(),
                                     [&](const SegmentCondition& c) { return c.segment == n; });
    if (count != 1) {
      throw std::invalid_argument("problem: segment '" + n + "' needs exactly one condition, found " +
                                  std::to_string(count));
    }
  }
  const auto vars = expression_variables();
  auto check_expr = [&](const util::Expression& e, const std::string& where) {
    for (const std::string& name : e.free_names()) {
      if (vars.count(name) == 0U) throw std::invalid_argument("problem: unknown name '" + name + "' in " + where);
    }
  };
  check_expr(pressure, "pressure");
  for (const SegmentCondition& c : conditions) {
    if (std::find(names.begin(), names.end(), c.segment) == names.end()) {
      throw std::invalid_argument("problem: condition for unknown segment '" + c.segment + "'");
    }
    for (int p = 0; p < kPairCount; ++p) check_expr(c.pairs[p].value, c.segment + "." + pair_name(Pair(p)));
  }
  if (!bending() && !pressure.is_constant_zero()) {
    throw std::invalid_argument("problem: transverse pressure needs a three-output (bending) problem");
  }
}

}  // namespace fvk::loss

#pragma once

/// @file problem.hpp
/// @brief Physical description of a plate problem: geometry, material,
/// loads, boundary prescriptions and the output transform of the network.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fvk/network/network.hpp"
#include "fvk/plate/mechanics.hpp"
#include "fvk/sampling/geometry.hpp"
#include "fvk/util/expression.hpp"

namespace fvk::loss {

/// Conjugate pairs on a boundary:
///   normal:     (N_nn, u_0n)
///   tangential: (N_ns, u_0s)
///   deflection: (V_n,  w)
///   rotation:   (M_nn, w_,n)
enum class Pair : int { normal = 0, tangential = 1, deflection = 2, rotation = 3 };
inline constexpr int kPairCount = 4;

const char* pair_name(Pair p);

/// Either a prescribed resultant (static) or a prescribed primary variable
/// (kinematic). Values are expressions in x, y and the problem variables.
struct PairCondition {
  bool kinematic = false;
  util::Expression value;  // default: static, zero (free edge)
};

struct SegmentCondition {
  std::string segment;
  std::array<PairCondition, kPairCount> pairs;

  PairCondition& operator[](Pair p) { return pairs[static_cast<int>(p)]; }
  const PairCondition& operator[](Pair p) const { return pairs[static_cast<int>(p)]; }
};

struct Problem {
  plate::PlateMaterial material;
  sampling::Geometry geometry;
  int outputs = 2;             // 2: plane stress (w = 0), 3: with deflection
  util::Expression pressure;   // q_t in N/mm^2, acting along +w
  std::vector<SegmentCondition> conditions;
  nn::OutputTransform transform;
  std::map<std::string, double> variables;  // extra names usable in expressions

  [[nodiscard]] bool bending() const { return outputs == 3; }
  /// Number of conjugate pairs that take part (2 in plane stress).
  [[nodiscard]] int active_pairs() const { return bending() ? 4 : 2; }

  /// Largest side of the bounding rectangle, used to scale residuals.
  [[nodiscard]] double length_scale() const;

  /// Expression variables: the extra names plus h, E, nu, C, D.
  [[nodiscard]] std::map<std::string, double> expression_variables() const;

  /// Condition of a segment, or throws std::invalid_argument.
  [[nodiscard]] const SegmentCondition& condition(const std::string& segment) const;

  /// Every boundary segment of the geometry has exactly one condition,
  /// every condition names an existing segment, material is admissible and
  /// every expression resolves.
  void validate() const;
};

}  // namespace fvk::loss

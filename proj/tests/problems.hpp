#pragma once

// Small problem definitions shared by the loss, training and acceptance tests.

#include <string>

#include "fvk/losses/problem.hpp"

namespace fvk::testing {

inline loss::SegmentCondition free_edge(const std::string& name) {
  loss::SegmentCondition c;
  c.segment = name;
  return c;
}

inline loss::SegmentCondition symmetry_edge(const std::string& name) {
  loss::SegmentCondition c = free_edge(name);
  c[loss::Pair::normal].kinematic = true;
  return c;
}

inline loss::SegmentCondition loaded_edge(const std::string& name, const std::string& traction) {
  loss::SegmentCondition c = free_edge(name);
  c[loss::Pair::normal].value = util::Expression::parse(traction);
  return c;
}

/// Quarter of a 20 x 20 plate, symmetric about x = 0 and y = 0, loaded on
/// the right edge by N_xx = `traction`, with the u_x = x u_x', u_y = y u_y'
/// output transform.
inline loss::Problem quarter_tension(const std::string& traction = "sin(pi*y/20)*h", double hole_radius = 0.0) {
  loss::Problem p;
  p.geometry.outer = {0.0, 10.0, 0.0, 10.0};
  if (hole_radius > 0.0) p.geometry.holes.push_back({0.0, 0.0, hole_radius, hole_radius});
  p.outputs = 2;
  p.conditions = {symmetry_edge("left"), symmetry_edge("bottom"), loaded_edge("right", traction), free_edge("top")};
  if (hole_radius > 0.0) p.conditions.push_back(free_edge("hole0"));
  p.transform.ux.factors = {nn::LinearFactor::times_x()};
  p.transform.uy.factors = {nn::LinearFactor::times_y()};
  return p;
}

/// Bending problem touching every pair type: clamped left edge, simply
/// supported right edge with an applied moment, a prescribed shear on the
/// bottom and a free top, under uniform pressure. No output transform.
inline loss::Problem mixed_bending() {
  loss::Problem p;
  p.geometry.outer = {0.0, 10.0, 0.0, 8.0};
  p.outputs = 3;
  p.pressure = util::Expression::parse("0.01");
  loss::SegmentCondition left{"left", {}};
  for (auto& pc : left.pairs) pc.kinematic = true;
  loss::SegmentCondition right{"right", {}};
  right[loss::Pair::normal].kinematic = true;
  right[loss::Pair::deflection].kinematic = true;
  right[loss::Pair::rotation].value = util::Expression::parse("0.2*y");
  loss::SegmentCondition bottom{"bottom", {}};
  bottom[loss::Pair::deflection].value = util::Expression::parse("0.05");
  bottom[loss::Pair::normal].value = util::Expression::parse("0.1");
  p.conditions = {left, right, bottom, free_edge("top")};
  return p;
}

}  // namespace fvk::testing

#pragma once

/// @file dataset.hpp
/// @brief Training data extracted from a reference solution.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>

#include "fvk/losses/losses.hpp"
#include "fvk/plate/field.hpp"
#include "fvk/reference/fem.hpp"

namespace fvk::ref {

/// Pointwise access to a reference field; empty outside its support.
using FieldSampler = std::function<std::optional<plate::FieldValues>(double, double)>;

/// `count` points drawn uniformly in the solid, targets interpolated from
/// `field`. Points the sampler cannot place are redrawn.
loss::Dataset make_dataset(const FieldSampler& field, const sampling::Geometry& g, int count, std::uint64_t seed);

/// From a plane-stress solution; warns on `warn` when the request exceeds
/// four samples per mesh node, beyond which the data carry no new detail.
loss::Dataset make_dataset(const PlaneStressSolution& s, const sampling::Geometry& g, int count,
                           std::uint64_t seed, std::ostream* warn = nullptr);

loss::DataPoint to_data_point(double x, double y, const plate::FieldValues& f);

}  // namespace fvk::ref

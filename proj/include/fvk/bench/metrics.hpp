#pragma once

/// @file metrics.hpp
/// @brief Field comparison metrics, CSV field export and hole-edge profiles.

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fvk/plate/field.hpp"
#include "fvk/sampling/geometry.hpp"

namespace fvk::bench {

/// 1 - SS_res / SS_tot about the truth mean. Empty for a constant truth.
/// Throws std::invalid_argument for unequal lengths or fewer than 2 values.
std::optional<double> r_squared(std::span<const double> pred, std::span<const double> truth);

double mse(std::span<const double> pred, std::span<const double> truth);

struct FieldMetric {
  plate::Field field;
  std::optional<double> r2;  // empty: not applicable
  double mse = 0.0;
};

/// Metrics at the points active in both grids, which must have the same shape.
std::vector<FieldMetric> compare(const plate::FieldGrid& pred, const plate::FieldGrid& truth,
                                 const std::vector<plate::Field>& fields);

/// CSV with header x,y,u_x,...,M_xy, a "# units" comment row and one row per
/// active point in grid order. Values use round-trip precision.
void export_fields(const plate::FieldGrid& g, const std::filesystem::path& path);

/// Rows of an exported file, in file order.
struct FieldRow {
  double x = 0.0;
  double y = 0.0;
  plate::FieldValues values;
};
std::vector<FieldRow> import_fields(const std::filesystem::path& path);

struct ProfilePoint {
  double phi = 0.0;
  double nxx = 0.0;
};

/// N_xx at `samples` angles phi in [0, pi/2] on the edge of `hole`, with
/// phi measured from the x axis: (cx + ax cos phi, cy + ay sin phi).
/// Throws std::invalid_argument when the geometry has no such hole.
std::vector<ProfilePoint> hole_edge_profile(const std::function<double(double, double)>& nxx,
                                            const sampling::Geometry& g, int hole = 0, int samples = 91);

}  // namespace fvk::bench

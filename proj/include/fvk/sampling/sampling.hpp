#pragma once

/// @file sampling.hpp
/// @brief Uniform random sample sets over the plate and its boundary, with
/// per-epoch resampling and optional denser sampling around holes.
///
/// Every region and every boundary segment draws from its own generator
/// seeded by (seed, epoch, stream), so a sample set depends only on those
/// three numbers.

#include <cstdint>
#include <string>
#include <vector>

#include "fvk/plate/mechanics.hpp"
#include "fvk/sampling/geometry.hpp"
#include "fvk/util/random.hpp"

namespace fvk::sampling {

/// Sub-region of the domain integrated separately.
struct DomainRegion {
  double area = 0.0;
  std::vector<Point> points;
};

struct BoundarySample {
  double x = 0.0;
  double y = 0.0;
  plate::BoundaryFrame frame;
};

struct SegmentSamples {
  std::string name;
  double length = 0.0;
  std::vector<BoundarySample> points;
};

struct SampleSet {
  std::vector<DomainRegion> regions;
  std::vector<SegmentSamples> segments;

  [[nodiscard]] double total_area() const;
  [[nodiscard]] double total_length() const;
  [[nodiscard]] std::size_t domain_count() const;
  [[nodiscard]] std::size_t boundary_count() const;
  [[nodiscard]] const SegmentSamples* segment(const std::string& name) const;
};

/// Denser sampling inside concentric ellipses around every hole.
struct Refinement {
  bool enabled = false;
  double scale = 2.0;    // region semi-axes = scale x hole semi-axes
  double density = 4.0;  // points per unit area relative to the outer region
};

struct SamplingPlan {
  Geometry geometry;
  int domain_count = 10000;
  int boundary_count = 1000;  // per named segment
  Refinement refinement;
  bool frozen = false;        // reuse the epoch-0 set for every epoch
  std::uint64_t seed = 1;

  void validate() const;
};

/// Uniform points in the solid (rejection against holes). With `regions`
/// non-empty only points inside (inside = true) or outside all of them are
/// kept. Throws std::runtime_error when the acceptance rate falls below 1%.
std::vector<Point> sample_domain(const Geometry& g, int count, util::Rng& rng,
                                 const std::vector<Ellipse>& regions = {}, bool inside = false);

/// Points uniform in arc length along the given pieces of one segment; the
/// count is split across pieces in proportion to their lengths.
std::vector<BoundarySample> sample_boundary(const std::vector<BoundaryPiece>& pieces, int count, util::Rng& rng);

/// The sample set of an epoch; deterministic in (plan.seed, epoch).
SampleSet resample_epoch(const SamplingPlan& plan, int epoch);

/// Refinement ellipses of a geometry.
std::vector<Ellipse> refinement_regions(const Geometry& g, const Refinement& r);

/// Split of a total count over two regions with relative densities.
std::pair<int, int> split_counts(int total, double area_inner, double area_outer, double density);

// Monte Carlo quadrature: mean(values) * measure.
double mc_integrate_domain(const std::vector<double>& values, double area);
double mc_integrate_boundary(const std::vector<double>& values, double length);

}  // namespace fvk::sampling

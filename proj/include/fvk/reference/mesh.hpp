#pragma once

/// @file mesh.hpp
/// @brief Structured 4-node quadrilateral meshes: plain rectangles and
/// quarter plates with a hole centred at the lower-left corner.

#include <array>
#include <string>
#include <vector>

#include "fvk/sampling/geometry.hpp"

namespace fvk::ref {

struct Mesh {
  struct Edge {
    int a = 0;
    int b = 0;
    int element = 0;  // owning element, used to orient the normal
    std::string segment;
  };

  std::vector<sampling::Point> nodes;
  std::vector<std::array<int, 4>> elements;  // counter-clockwise
  std::vector<Edge> boundary;

  /// Nodes lying on the boundary edges of a segment, sorted and unique.
  [[nodiscard]] std::vector<int> segment_nodes(const std::string& segment) const;

  /// Smallest Jacobian determinant over all 2x2 Gauss points.
  [[nodiscard]] double min_jacobian() const;

  /// Throws std::runtime_error for a non-positive Jacobian or an element
  /// referencing a missing node.
  void check() const;
};

struct MeshOptions {
  int resolution = 128;  // elements along the longer side, or around the hole
  double grading = 8.0;  // radial size ratio outer/inner for holed quarters
};

/// nx x ny elements, edges tagged left/right/bottom/top.
Mesh rectangle_mesh(const sampling::Rect& r, int nx, int ny);

/// Two transfinite patches between the hole arc and the outer edges, split
/// along the diagonal towards the far corner. `n_arc` elements around each
/// half of the arc, `n_radial` across, sizes growing geometrically by
/// `grading` away from the hole.
Mesh holed_corner_mesh(const sampling::Rect& r, const sampling::Ellipse& hole, int n_arc, int n_radial,
                       double grading);

/// Picks the mesher for a geometry; throws std::invalid_argument when the
/// geometry is neither a plain rectangle nor a quarter with one corner hole.
Mesh build_mesh(const sampling::Geometry& g, const MeshOptions& opt);

}  // namespace fvk::ref

#pragma once

/// @file fem.hpp
/// @brief Linear plane-stress finite elements (bilinear quads, 2x2 Gauss)
/// for the in-plane problems.

#include <optional>
#include <vector>

#include "fvk/losses/problem.hpp"
#include "fvk/plate/field.hpp"
#include "fvk/reference/mesh.hpp"

namespace fvk::ref {

class PlaneStressSolution {
 public:
  PlaneStressSolution(Mesh mesh, std::vector<double> u, std::vector<plate::Tensor2<double>> nodal_n,
                      double strain_energy);

  [[nodiscard]] const Mesh& mesh() const { return mesh_; }
  [[nodiscard]] std::size_t dof_count() const { return u_.size(); }

  /// Nodal displacement and averaged, extrapolated resultants.
  [[nodiscard]] plate::FieldValues nodal(int node) const;

  /// Bilinear interpolation inside the element containing (x, y). Points
  /// slightly outside the mesh (between a curved edge and its chords) are
  /// projected onto the nearest element; empty when clearly outside.
  [[nodiscard]] std::optional<plate::FieldValues> evaluate(double x, double y) const;

  /// 1/2 u^T K u.
  [[nodiscard]] double strain_energy() const { return energy_; }

 private:
  void build_locator();

  Mesh mesh_;
  std::vector<double> u_;  // (u_x, u_y) per node
  std::vector<plate::Tensor2<double>> n_;
  double energy_ = 0.0;

  // uniform bucket grid of element candidates
  sampling::Rect box_{};
  int bx_ = 1, by_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Solves the in-plane problem: kinematic normal/tangential pairs fix the
/// displacement of straight edges, static pairs apply tractions. Throws
/// std::invalid_argument for bending problems or kinematic pairs on hole
/// edges, std::runtime_error for a singular system.
PlaneStressSolution fem_plane_stress(const loss::Problem& problem, const MeshOptions& opt = {});

/// The solution on an nx x ny metric grid masked by the problem geometry.
plate::FieldGrid sample_grid(const PlaneStressSolution& s, const sampling::Geometry& g, int nx = 101, int ny = 101);

}  // namespace fvk::ref

#pragma once

/// @file case_spec.hpp
/// @brief Benchmark case files: flat INI-style sections describing the
/// plate, its loads and supports, the network, the loss, the reference
/// solver and the named training presets.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fvk/losses/losses.hpp"
#include "fvk/plate/field.hpp"
#include "fvk/reference/bending.hpp"
#include "fvk/sampling/sampling.hpp"
#include "fvk/training/training.hpp"

namespace fvk::bench {

/// Invalid case file or override. `field()` names the offending entry as
/// "section.key" (or just the section).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ReferenceKind { none, fem, fd_bending, buckling };

ReferenceKind parse_reference_kind(const std::string& s);
std::string to_string(ReferenceKind k);

struct Preset {
  std::string name;
  int domain = 10000;
  int boundary = 1000;  // per segment
  train::Schedule schedule;
};

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::none;
  int resolution = 128;  // FEM elements along the longer side / FD nodes per side
  double grading = 8.0;
  ref::EdgeSupports supports;  // FD solvers
};

struct BucklingSpec {
  int init_mode = 1;
  double init_amplitude = 1.0;  // mm, peak of the pre-training deflection
  int pretrain_points = 2000;
  train::Schedule pretrain = {{1e-3, 1000}};
};

struct CaseSpec {
  std::string name;
  std::string description;
  loss::Problem problem;
  std::vector<int> hidden = {5, 5, 5, 5, 5};
  nn::Activation activation = nn::Activation::tanh;
  loss::LossConfig loss;
  sampling::Refinement refinement;
  bool frozen_sampling = false;
  std::size_t batch_size = 0;       // PDE loss; the energy loss always uses the whole set
  std::size_t data_batch_size = 0;  // data-driven loss
  std::uint64_t seed = 1;
  std::vector<plate::Field> fields;  // compared in the report
  ReferenceSpec reference;
  std::optional<BucklingSpec> buckling;
  std::map<std::string, Preset> presets;

  /// Layer sizes including the 2 inputs and the 2 or 3 outputs.
  [[nodiscard]] std::vector<int> layer_sizes() const;
  /// Centre and half widths of the outer rectangle.
  [[nodiscard]] nn::InputScaling input_scaling() const;
  [[nodiscard]] const Preset& preset(const std::string& name) const;
};

/// Parses case text; `origin` prefixes messages. Throws ValidationError.
/// `variables` override entries of the [variables] section. Buckling cases
/// get the variable "ncr", the critical load of their reference supports,
/// unless it is given.
CaseSpec parse_case(const std::string& text, const std::string& origin = "case",
                    const std::map<std::string, double>& variables = {});
CaseSpec load_case(const std::filesystem::path& path, const std::map<std::string, double>& variables = {});

/// Directory of shipped case files: $FVK_CASES_DIR, else the source tree.
std::filesystem::path default_cases_dir();

/// `name` as a file path if it has an extension or a directory part and
/// exists, else <cases dir>/<name>.ini.
std::filesystem::path resolve_case(const std::string& name, const std::filesystem::path& cases_dir = {});

/// Case names (file stems) in a directory, sorted.
std::vector<std::string> list_cases(const std::filesystem::path& cases_dir);

/// "1e-3:3000 1e-4:6000" <-> schedule.
train::Schedule parse_schedule(const std::string& text);
std::string format_schedule(const train::Schedule& s);

/// An affine factor "a*x + b*y + c", optionally "(...)^n".
nn::LinearFactor parse_linear_factor(const std::string& text);

}  // namespace fvk::bench

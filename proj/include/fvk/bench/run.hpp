#pragma once

/// @file run.hpp
/// @brief Running a case: reference solve, training, evaluation on the
/// metric grid, and the run report.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fvk/bench/case_spec.hpp"
#include "fvk/bench/metrics.hpp"
#include "fvk/reference/bending.hpp"
#include "fvk/reference/dataset.hpp"
#include "fvk/reference/fem.hpp"

namespace fvk::bench {

/// Command-line style adjustments of a case.
struct Overrides {
  std::optional<loss::LossKind> loss;
  std::string preset = "desk";
  std::optional<int> samples;  // domain points (data points for the data loss); edges get a tenth
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda_s;
  std::optional<double> lambda_d;
  std::optional<bool> force_terms;            // data loss: also fit N_xx, N_yy, N_xy
  std::optional<bool> nondimensional;         // PDE loss: scale residuals by material and size
  std::optional<int> init_mode;               // buckling cases
  std::optional<train::Schedule> schedule;    // replaces the preset schedule
};

/// A solved reference and its values on the metric grid.
struct Reference {
  ReferenceKind kind = ReferenceKind::none;
  plate::FieldGrid grid;
  ref::FieldSampler sampler;  // pointwise values, for datasets and profiles
  std::shared_ptr<const ref::PlaneStressSolution> fem;
  std::shared_ptr<const ref::FdPlate> plate;
  std::shared_ptr<const ref::BucklingSolution> buckling;  // with the first three modes
};

/// Throws ValidationError when the case has no usable reference.
Reference solve_reference(const CaseSpec& spec, int nx = 101, int ny = 101);

/// Displacements and resultants of the trained network at a point; moments
/// only for bending problems.
plate::FieldValues network_values(const nn::NetworkParams& params, const loss::Problem& problem, double x, double y);
plate::FieldGrid network_grid(const nn::NetworkParams& params, const loss::Problem& problem, int nx = 101,
                              int ny = 101);

struct RunReport {
  std::string case_name;
  std::string loss;
  std::string preset;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;  // echo of the effective settings
  std::vector<FieldMetric> metrics;
  int epochs = 0;
  double final_loss = 0.0;
  double best_loss = 0.0;
  int best_epoch = -1;
  std::map<std::string, double> extras;  // case-specific scalars
  std::vector<std::string> flags;
  double wall_time = 0.0;  // seconds

  [[nodiscard]] std::optional<double> r2(plate::Field f) const;
  [[nodiscard]] bool has_flag(const std::string& f) const;

  /// JSON text; everything but "wall_time_s" is a function of case, seed
  /// and overrides.
  [[nodiscard]] std::string to_json(bool with_wall_time = true) const;
  static RunReport from_json(const std::string& text);
};

/// R² below this marks a field as poorly reproduced ("low_r2" flag).
inline constexpr double kLowR2 = 0.9;

struct RunOutput {
  RunReport report;
  nn::NetworkParams params;
  train::TrainingHistory history;
  plate::FieldGrid fields;
  Reference reference;
  std::vector<ProfilePoint> network_profile;    // hole cases
  std::vector<ProfilePoint> reference_profile;
};

/// Trains the case and evaluates it. `log` receives progress lines.
/// Throws ValidationError for bad overrides, train::DivergenceError when
/// training diverges.
RunOutput run_case(const CaseSpec& spec, const Overrides& o = {}, std::ostream* log = nullptr);

/// Writes report.json, fields.csv, reference.csv, history.csv, network.txt
/// and, for hole cases, profile.csv into `dir`.
void write_outputs(const RunOutput& r, const std::filesystem::path& dir);

/// Reports found in `dir` and its immediate subdirectories, sorted by path.
std::vector<std::pair<std::filesystem::path, RunReport>> collect_reports(const std::filesystem::path& dir);

/// One-line-per-run summary table.
void print_summary(const std::vector<std::pair<std::filesystem::path, RunReport>>& reports, std::ostream& out);

}  // namespace fvk::bench

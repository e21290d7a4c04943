#include "fvk/bench/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace fvk::bench {

using plate::Field;
using plate::FieldValues;

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string join(const std::vector<int>& v) {
  std::ostringstream s;
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? " " : "") << v[i];
  return s.str();
}

// Deflection peak normalized to +1, so shapes compare independent of amplitude.
plate::FieldGrid normalized_w(const plate::FieldGrid& g) {
  double peak = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.active(k) && std::fabs(g.at(k)[Field::w]) > std::fabs(peak)) peak = g.at(k)[Field::w];
  }
  plate::FieldGrid out = g;
  if (peak == 0.0) return out;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out.active(k)) out.at(k)[Field::w] /= peak;
  }
  return out;
}

}  // namespace

Reference solve_reference(const CaseSpec& spec, int nx, int ny) {
  const loss::Problem& p = spec.problem;
  Reference r;
  r.kind = spec.reference.kind;
  switch (spec.reference.kind) {
    case ReferenceKind::none:
      throw ValidationError("case.reference", "case '" + spec.name + "' has no reference solver");
    case ReferenceKind::fem: {
      auto sol = std::make_shared<const ref::PlaneStressSolution>(
          ref::fem_plane_stress(p, {spec.reference.resolution, spec.reference.grading}));
      r.grid = ref::sample_grid(*sol, p.geometry, nx, ny);
      r.sampler = [sol](double x, double y) { return sol->evaluate(x, y); };
      r.fem = sol;
      break;
    }
    case ReferenceKind::fd_bending: {
      if (!p.geometry.holes.empty()) throw ValidationError("case.reference", "fd_bending needs a plate without holes");
      auto plate = std::make_shared<const ref::FdPlate>(ref::fd_bending(p.geometry.outer, spec.reference.resolution,
                                                                        p.material, p.pressure,
                                                                        p.expression_variables(),
                                                                        spec.reference.supports));
      r.grid = plate::FieldGrid::over(p.geometry, nx, ny);
      r.grid.fill([&](double x, double y) { return plate->evaluate(x, y); });
      r.sampler = [plate](double x, double y) { return std::optional<FieldValues>(plate->evaluate(x, y)); };
      r.plate = plate;
      break;
    }
    case ReferenceKind::buckling: {
      if (!p.geometry.holes.empty()) throw ValidationError("case.reference", "buckling needs a plate without holes");
      auto b = std::make_shared<const ref::BucklingSolution>(ref::critical_buckling_load(
          p.material, p.geometry.outer, spec.reference.supports, spec.reference.resolution, 3));
      const ref::FdPlate& mode = b->modes.front();
      r.grid = plate::FieldGrid::over(p.geometry, nx, ny);
      r.grid.fill([&](double x, double y) { return mode.evaluate(x, y); });
      r.sampler = [b](double x, double y) { return std::optional<FieldValues>(b->modes.front().evaluate(x, y)); };
      r.buckling = b;
      break;
    }
  }
  return r;
}

FieldValues network_values(const nn::NetworkParams& params, const loss::Problem& problem, double x, double y) {
  const int order = problem.bending() ? 2 : 1;
  const ad::DerivativeBundle<double> d = nn::derivatives_at(params, x, y, order, problem.transform);
  const plate::PlateState<double> s = plate::plate_state(problem.material, d);
  FieldValues f;
  f[Field::ux] = d.ux[0];
  f[Field::uy] = d.uy[0];
  f[Field::w] = d.w[0];
  f[Field::nxx] = s.N.xx;
  f[Field::nyy] = s.N.yy;
  f[Field::nxy] = s.N.xy;
  f[Field::mxx] = s.M.xx;
  f[Field::myy] = s.M.yy;
  f[Field::mxy] = s.M.xy;
  return f;
}

plate::FieldGrid network_grid(const nn::NetworkParams& params, const loss::Problem& problem, int nx, int ny) {
  plate::FieldGrid g = plate::FieldGrid::over(problem.geometry, nx, ny);
  g.fill([&](double x, double y) { return network_values(params, problem, x, y); });
  return g;
}

std::optional<double> RunReport::r2(Field f) const {
  for (const FieldMetric& m : metrics) {
    if (m.field == f) return m.r2;
  }
  return std::nullopt;
}

bool RunReport::has_flag(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

std::string RunReport::to_json(bool with_wall_time) const {
  nlohmann::json j;
  j["case"] = case_name;
  j["loss"] = loss;
  j["preset"] = preset;
  j["seed"] = seed;
  j["config"] = config;
  nlohmann::json ms = nlohmann::json::array();
  for (const FieldMetric& m : metrics) {
    nlohmann::json e;
    e["field"] = plate::field_names()[static_cast<int>(m.field)];
    e["r2"] = m.r2 ? nlohmann::json(*m.r2) : nlohmann::json(nullptr);
    e["mse"] = m.mse;
    ms.push_back(e);
  }
  j["metrics"] = ms;
  j["epochs"] = epochs;
  j["final_loss"] = final_loss;
  j["best_loss"] = best_loss;
  j["best_epoch"] = best_epoch;
  j["extras"] = extras;
  j["flags"] = flags;
  if (with_wall_time) j["wall_time_s"] = wall_time;
  return j.dump(2) + "\n";
}

RunReport RunReport::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  RunReport r;
  r.case_name = j.at("case").get<std::string>();
  r.loss = j.at("loss").get<std::string>();
  r.preset = j.at("preset").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config = j.at("config").get<std::map<std::string, std::string>>();
  for (const auto& e : j.at("metrics")) {
    FieldMetric m{plate::parse_field(e.at("field").get<std::string>()), std::nullopt, e.at("mse").get<double>()};
    if (!e.at("r2").is_null()) m.r2 = e.at("r2").get<double>();
    r.metrics.push_back(m);
  }
  r.epochs = j.at("epochs").get<int>();
  r.final_loss = j.at("final_loss").get<double>();
  r.best_loss = j.at("best_loss").get<double>();
  r.best_epoch = j.at("best_epoch").get<int>();
  r.extras = j.at("extras").get<std::map<std::string, double>>();
  r.flags = j.at("flags").get<std::vector<std::string>>();
  if (j.contains("wall_time_s")) r.wall_time = j.at("wall_time_s").get<double>();
  return r;
}

RunOutput run_case(const CaseSpec& spec, const Overrides& o, std::ostream* log) {
  const auto t0 = std::chrono::steady_clock::now();
  const loss::Problem& problem = spec.problem;

  loss::LossConfig lc = spec.loss;
  if (o.loss) lc.kind = *o.loss;
  if (o.lambda_s) lc.lambda_s = *o.lambda_s;
  if (o.lambda_d) lc.lambda_d = *o.lambda_d;
  if (o.force_terms) lc.use_force = *o.force_terms;
  if (o.nondimensional) lc.nondimensional = *o.nondimensional;
  try {
    lc.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError("loss", e.what());
  }
  const Preset& preset = spec.preset(o.preset);
  if (o.samples && *o.samples < 1) throw ValidationError("samples", "must be positive");
  const int domain = o.samples.value_or(preset.domain);
  const int boundary = o.samples ? std::max(10, *o.samples / 10) : preset.boundary;
  const train::Schedule schedule = o.schedule.value_or(preset.schedule);
  const std::uint64_t seed = o.seed.value_or(spec.seed);

  RunOutput out;
  if (spec.reference.kind != ReferenceKind::none) out.reference = solve_reference(spec);

  train::TrainingConfig tc;
  tc.schedule = schedule;
  tc.seed = util::derive_seed(seed, 3);
  tc.log = log;
  tc.log_every = log != nullptr ? std::max(1, train::total_epochs(schedule) / 20) : 0;

  sampling::SamplingPlan plan;
  plan.geometry = problem.geometry;
  plan.domain_count = domain;
  plan.boundary_count = boundary;
  plan.refinement = spec.refinement;
  plan.frozen = spec.frozen_sampling;
  plan.seed = util::derive_seed(seed, 1);

  const nn::NetworkParams init = nn::initialize(spec.layer_sizes(), spec.activation, seed, spec.input_scaling());
  RunReport& rep = out.report;
  std::optional<train::BucklingResult> buckled;

  if (lc.kind == loss::LossKind::data_driven) {
    if (!out.reference.sampler) throw ValidationError("loss", "the data-driven loss needs a reference solution");
    const loss::Dataset data = ref::make_dataset(out.reference.sampler, problem.geometry, domain,
                                                 util::derive_seed(seed, 2));
    tc.batch_size = spec.data_batch_size;
    train::TrainingResult r = train::train_data(init, problem, lc, data, tc);
    out.params = std::move(r.params);
    out.history = std::move(r.history);
  } else if (spec.buckling && out.reference.buckling) {
    if (lc.kind != loss::LossKind::energy_based) {
      throw ValidationError("loss", "buckled states are only found by the energy loss");
    }
    const int m = o.init_mode.value_or(spec.buckling->init_mode);
    if (m < 1 || m > static_cast<int>(out.reference.buckling->modes.size())) {
      throw ValidationError("init_mode", "must lie in 1.." + std::to_string(out.reference.buckling->modes.size()));
    }
    const std::shared_ptr<const ref::BucklingSolution> b = out.reference.buckling;
    const double amp = spec.buckling->init_amplitude;
    const train::Profile profile = [b, m, amp](double x, double y) {
      return std::array<double, 3>{0.0, 0.0, amp * b->modes[m - 1].evaluate(x, y)[Field::w]};
    };
    train::BucklingConfig bc;
    bc.pretrain.schedule = spec.buckling->pretrain;
    bc.pretrain.seed = util::derive_seed(seed, 4);
    bc.pretrain_points = spec.buckling->pretrain_points;
    bc.train = tc;
    bc.trivial = tc;
    bc.trivial.log = nullptr;
    bc.trivial.log_every = 0;
    bc.check_seed = util::derive_seed(seed, 5);
    buckled = train::train_buckling(init, problem, lc, plan, profile, bc);
    out.params = buckled->training.params;
    out.history = buckled->training.history;
    rep.config["init_mode"] = std::to_string(m);
  } else {
    tc.batch_size = lc.kind == loss::LossKind::pde_based ? spec.batch_size : 0;
    train::TrainingResult r = train::train(init, problem, lc, plan, tc);
    out.params = std::move(r.params);
    out.history = std::move(r.history);
  }

  out.fields = network_grid(out.params, problem);

  rep.case_name = spec.name;
  rep.loss = loss::to_string(lc.kind);
  rep.preset = preset.name;
  rep.seed = seed;
  rep.config["description"] = spec.description;
  rep.config["lambda_s"] = fmt(lc.lambda_s);
  rep.config["lambda_d"] = fmt(lc.effective_lambda_d(problem));
  rep.config["force_terms"] = lc.use_force ? "true" : "false";
  rep.config["nondimensional"] = lc.nondimensional ? "true" : "false";
  rep.config["domain_samples"] = std::to_string(domain);
  rep.config["boundary_samples"] = std::to_string(boundary);
  rep.config["schedule"] = format_schedule(schedule);
  rep.config["layers"] = join(spec.layer_sizes());
  rep.config["activation"] = nn::to_string(spec.activation);
  rep.config["refinement"] = spec.refinement.enabled ? "true" : "false";
  rep.config["reference"] = to_string(spec.reference.kind);
  rep.config["reference_resolution"] = std::to_string(spec.reference.resolution);
  for (const auto& [k, v] : problem.variables) rep.config["var." + k] = fmt(v);

  rep.epochs = static_cast<int>(out.history.epochs.size());
  rep.final_loss = out.history.epochs.empty() ? 0.0 : out.history.epochs.back().loss;
  rep.best_loss = out.history.best_loss;
  rep.best_epoch = out.history.best_epoch;

  switch (out.reference.kind) {
    case ReferenceKind::none:
      break;
    case ReferenceKind::fem:
    case ReferenceKind::fd_bending:
      rep.metrics = compare(out.fields, out.reference.grid, spec.fields);
      break;
    case ReferenceKind::buckling:
      rep.metrics = compare(normalized_w(out.fields), out.reference.grid, {Field::w});
      break;
  }
  for (const FieldMetric& m : rep.metrics) {
    if (m.r2 && *m.r2 < kLowR2) {
      rep.flags.push_back("low_r2");
      break;
    }
  }

  // case-specific scalars
  if (!problem.geometry.holes.empty() && out.reference.sampler) {
    const sampling::Ellipse& e = problem.geometry.holes.front();
    auto net_nxx = [&](double x, double y) { return network_values(out.params, problem, x, y)[Field::nxx]; };
    auto ref_nxx = [&](double x, double y) {
      const auto v = out.reference.sampler(x, y);
      return v ? (*v)[Field::nxx] : std::nan("");
    };
    out.network_profile = hole_edge_profile(net_nxx, problem.geometry);
    out.reference_profile = hole_edge_profile(ref_nxx, problem.geometry);
    const double net_peak = net_nxx(e.cx, e.cy + e.ay);
    const double ref_peak = ref_nxx(e.cx, e.cy + e.ay);
    rep.extras["hole_peak_nxx_network"] = net_peak;
    rep.extras["hole_peak_nxx_reference"] = ref_peak;
    rep.extras["hole_peak_relative_error"] = std::fabs(net_peak - ref_peak) / std::fabs(ref_peak);
  }
  if (out.reference.plate) {
    const sampling::Rect& b = problem.geometry.outer;
    const double cx = 0.5 * (b.x_min + b.x_max), cy = 0.5 * (b.y_min + b.y_max);
    const double net = network_values(out.params, problem, cx, cy)[Field::w];
    const double refw = out.reference.plate->evaluate(cx, cy)[Field::w];
    rep.extras["center_w_network"] = net;
    rep.extras["center_w_reference"] = refw;
    rep.extras["center_w_relative_error"] = std::fabs(net - refw) / std::fabs(refw);
  }
  if (buckled) {
    const ref::BucklingSolution& b = *out.reference.buckling;
    rep.extras["critical_load"] = b.load;
    rep.extras["buckling_coefficient"] = b.k;
    rep.extras["energy"] = buckled->energy;
    rep.extras["trivial_energy"] = buckled->trivial_energy;
    rep.extras["max_deflection"] = buckled->max_deflection;
    if (buckled->restart_energy) rep.extras["restart_energy"] = *buckled->restart_energy;
    // sign-definite: no grid point deflects against the peak by more than 1%
    double peak = 0.0;
    for (std::size_t k = 0; k < out.fields.size(); ++k) {
      if (out.fields.active(k) && std::fabs(out.fields.at(k)[Field::w]) > std::fabs(peak)) peak = out.fields.at(k)[Field::w];
    }
    double opposite = 0.0;
    for (std::size_t k = 0; k < out.fields.size(); ++k) {
      if (out.fields.active(k)) opposite = std::max(opposite, -out.fields.at(k)[Field::w] * (peak < 0 ? -1.0 : 1.0));
    }
    rep.extras["opposite_deflection_ratio"] = peak == 0.0 ? 0.0 : opposite / std::fabs(peak);
    if (buckled->max_deflection < 1e-3 * problem.material.h) rep.flags.push_back("flat");
    if (buckled->trivial_suspect) rep.flags.push_back("trivial_suspect");
  }

  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_outputs(const RunOutput& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "report.json");
    f << r.report.to_json();
    if (!f) throw std::runtime_error("cannot write " + (dir / "report.json").string());
  }
  export_fields(r.fields, dir / "fields.csv");
  if (r.reference.kind != ReferenceKind::none) export_fields(r.reference.grid, dir / "reference.csv");
  r.history.write_csv(dir / "history.csv");
  nn::save_checkpoint(r.params, dir / "network.txt");
  if (!r.network_profile.empty()) {
    std::ofstream f(dir / "profile.csv");
    f << "phi,N_xx_network,N_xx_reference\n" << std::setprecision(17);
    for (std::size_t i = 0; i < r.network_profile.size(); ++i) {
      f << r.network_profile[i].phi << ',' << r.network_profile[i].nxx << ',' << r.reference_profile[i].nxx << '\n';
    }
  }
}

std::vector<std::pair<std::filesystem::path, RunReport>> collect_reports(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_regular_file(dir / "report.json")) files.push_back(dir / "report.json");
  if (std::filesystem::is_directory(dir)) {
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.is_directory() && std::filesystem::is_regular_file(e.path() / "report.json")) {
        files.push_back(e.path() / "report.json");
      }
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::filesystem::path, RunReport>> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::ostringstream text;
    text << in.rdbuf();
    try {
      out.emplace_back(f.parent_path(), RunReport::from_json(text.str()));
    } catch (const std::exception& e) {
      throw std::runtime_error(f.string() + ": " + e.what());
    }
  }
  return out;
}

void print_summary(const std::vector<std::pair<std::filesystem::path, RunReport>>& reports, std::ostream& out) {
  for (const auto& [path, r] : reports) {
    out << path.string() << "  " << r.case_name << "  loss=" << r.loss << "  preset=" << r.preset
        << "  seed=" << r.seed << "  final_loss=" << std::setprecision(6) << r.final_loss;
    for (const FieldMetric& m : r.metrics) {
      out << "  R2(" << plate::field_names()[static_cast<int>(m.field)] << ")=";
      if (m.r2) {
        out << std::fixed << std::setprecision(4) << *m.r2 << std::defaultfloat;
      } else {
        out << "n/a";
      }
    }
    for (const std::string& f : r.flags) out << "  [" << f << "]";
    out << '\n';
  }
}

}  // namespace fvk::bench

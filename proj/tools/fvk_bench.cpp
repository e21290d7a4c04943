// fvk-bench: run benchmark cases, solve their references, summarize reports.
//
//   fvk-bench list-cases
//   fvk-bench reference case2 --out out/case2-ref
//   fvk-bench run case1 --loss energy --preset paper --out out/case1
//   fvk-bench report out
//
// Exit codes: 0 success, 2 validation error, 3 training divergence.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fvk/bench/run.hpp"

namespace {

constexpr int kValidation = 2;
constexpr int kDivergence = 3;

using namespace fvk;

std::map<std::string, double> parse_vars(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const std::string& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw bench::ValidationError("--var", "expected name=value, got '" + s + "'");
    try {
      std::size_t used = 0;
      const std::string v = s.substr(eq + 1);
      out[s.substr(0, eq)] = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw bench::ValidationError("--var", "'" + s + "' has no numeric value");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plate benchmarks: neural-network solutions against classical references"};
  app.require_subcommand(1);
  std::string cases_dir;
  app.add_option("--cases", cases_dir, "Directory of case files (default: shipped cases)");

  auto* list = app.add_subcommand("list-cases", "List the shipped cases");

  std::string case_name;
  std::string out_dir;
  std::vector<std::string> vars;

  auto* reference = app.add_subcommand("reference", "Solve a case's reference and export it");
  reference->add_option("case", case_name, "Case name or file")->required();
  reference->add_option("--out", out_dir, "Output directory")->required();
  reference->add_option("--var", vars, "Override a case variable, name=value");

  auto* run = app.add_subcommand("run", "Train a case and report metrics against its reference");
  std::string loss_kind;
  std::string preset = "desk";
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda_s, lambda_d;
  std::optional<int> init_mode;
  bool quiet = false;
  bool force_terms = false;
  std::optional<bool> raw_residuals;
  run->add_option("case", case_name, "Case name or file")->required();
  run->add_option("--loss", loss_kind, "Loss: data, pde or energy (default: the case's)")
      ->check(CLI::IsMember({"data", "pde", "energy"}));
  run->add_option("--preset", preset, "Training preset: paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  run->add_option("--samples", samples, "Domain samples (edges get a tenth each)")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--lambda-s", lambda_s, "Boundary-residual weight of the PDE loss")->check(CLI::PositiveNumber);
  run->add_option("--lambda-d", lambda_d, "Kinematic penalty weight")->check(CLI::PositiveNumber);
  run->add_option("--init-mode", init_mode, "Buckling mode used to initialize (buckling cases)");
  run->add_option("--var", vars, "Override a case variable, name=value");
  run->add_option("--out", out_dir, "Output directory (default: out/<case>-<loss>-<preset>)");
  run->add_flag("--force-terms", force_terms, "Data loss: fit the membrane forces as well");
  run->add_option("--raw-residuals", raw_residuals, "PDE loss: residuals in their own units (true) or scaled (false)");
  run->add_flag("--quiet", quiet, "No progress lines");

  auto* report = app.add_subcommand("report", "Summarize the reports in a directory");
  std::string report_dir;
  report->add_option("dir", report_dir, "Directory holding report.json or run subdirectories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  try {
    const std::filesystem::path dir = cases_dir.empty() ? bench::default_cases_dir() : std::filesystem::path(cases_dir);
    if (*list) {
      for (const std::string& name : bench::list_cases(dir)) {
        const bench::CaseSpec c = bench::load_case(dir / (name + ".ini"));
        std::cout << name << "  " << c.description << '\n';
      }
      return 0;
    }
    if (*report) {
      const auto reports = bench::collect_reports(report_dir);
      if (reports.empty()) {
        std::cerr << "no report.json under " << report_dir << '\n';
        return kValidation;
      }
      bench::print_summary(reports, std::cout);
      return 0;
    }

    const bench::CaseSpec spec = bench::load_case(bench::resolve_case(case_name, dir), parse_vars(vars));
    if (*reference) {
      const bench::Reference r = bench::solve_reference(spec);
      std::filesystem::create_directories(out_dir);
      bench::export_fields(r.grid, std::filesystem::path(out_dir) / "reference.csv");
      if (r.buckling) {
        std::cout << "critical load " << r.buckling->load << " N/mm, k = " << r.buckling->k << '\n';
      }
      std::cout << "wrote " << (std::filesystem::path(out_dir) / "reference.csv").string() << '\n';
      return 0;
    }

    bench::Overrides o;
    if (!loss_kind.empty()) o.loss = loss::parse_loss_kind(loss_kind);
    o.preset = preset;
    o.samples = samples;
    o.seed = seed;
    o.lambda_s = lambda_s;
    o.lambda_d = lambda_d;
    o.init_mode = init_mode;
    if (force_terms) o.force_terms = true;
    if (raw_residuals) o.nondimensional = !*raw_residuals;
    const bench::RunOutput r = bench::run_case(spec, o, quiet ? nullptr : &std::cout);
    const std::filesystem::path out =
        out_dir.empty() ? std::filesystem::path("out") / (spec.name + "-" + r.report.loss + "-" + preset)
                        : std::filesystem::path(out_dir);
    bench::write_outputs(r, out);
    bench::print_summary({{out, r.report}}, std::cout);
    return 0;
  } catch (const bench::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const train::DivergenceError& e) {
    std::cerr << "training diverged at epoch " << e.epoch() << ": " << e.what() << '\n';
    return kDivergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

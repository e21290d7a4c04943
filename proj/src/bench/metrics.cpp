#include "fvk/bench/metrics.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fvk::bench {

std::optional<double> r_squared(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("r_squared: length mismatch");
  if (truth.size() < 2) throw std::invalid_argument("r_squared: need at least two values");
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  // constant up to rounding of the mean
  double scale = 0.0;
  for (double t : truth) scale = std::max(scale, std::fabs(t));
  if (ss_tot <= std::pow(64.0 * std::numeric_limits<double>::epsilon() * scale, 2) * truth.size()) {
    return std::nullopt;
  }
  return 1.0 - ss_res / ss_tot;
}

double mse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("mse: length mismatch");
  if (truth.empty()) throw std::invalid_argument("mse: no values");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return s / static_cast<double>(truth.size());
}

std::vector<FieldMetric> compare(const plate::FieldGrid& pred, const plate::FieldGrid& truth,
                                 const std::vector<plate::Field>& fields) {
  if (pred.nx() != truth.nx() || pred.ny() != truth.ny()) throw std::invalid_argument("compare: grid shape mismatch");
  std::vector<FieldMetric> out;
  for (plate::Field f : fields) {
    std::vector<double> p, t;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (!pred.active(k) || !truth.active(k)) continue;
      p.push_back(pred.at(k)[f]);
      t.push_back(truth.at(k)[f]);
    }
    out.push_back({f, r_squared(p, t), mse(p, t)});
  }
  return out;
}

void export_fields(const plate::FieldGrid& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_fields: cannot write " + path.string());
  out << "x,y";
  for (const std::string& n : plate::field_names()) out << ',' << n;
  out << "\n# units: mm,mm";
  for (const std::string& u : plate::field_units()) out << ',' << u;
  out << '\n' << std::setprecision(17);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      if (!g.active(k)) continue;
      out << g.x(i) << ',' << g.y(j);
      for (double v : g.at(k).v) out << ',' << v;
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("export_fields: write failed for " + path.string());
}

std::vector<FieldRow> import_fields(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import_fields: cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("import_fields: empty file");
  std::string expected = "x,y";
  for (const std::string& n : plate::field_names()) expected += "," + n;
  if (line != expected) throw std::runtime_error("import_fields: unexpected header '" + line + "'");
  std::vector<FieldRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      try {
        v.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cell.size()) {
        throw std::runtime_error("import_fields: line " + std::to_string(line_no) + ": bad value '" + cell + "'");
      }
    }
    if (v.size() != 2 + plate::kFieldCount) {
      throw std::runtime_error("import_fields: line " + std::to_string(line_no) + ": wrong column count");
    }
    FieldRow r;
    r.x = v[0];
    r.y = v[1];
    for (int f = 0; f < plate::kFieldCount; ++f) r.values.v[f] = v[2 + f];
    rows.push_back(r);
  }
  return rows;
}

std::vector<ProfilePoint> hole_edge_profile(const std::function<double(double, double)>& nxx,
                                            const sampling::Geometry& g, int hole, int samples) {
  if (hole < 0 || hole >= static_cast<int>(g.holes.size())) {
    throw std::invalid_argument("hole_edge_profile: the geometry has no hole " + std::to_string(hole));
  }
  if (samples < 2) throw std::invalid_argument("hole_edge_profile: need at least two samples");
  const sampling::Ellipse& e = g.holes[hole];
  std::vector<ProfilePoint> out;
  for (int i = 0; i < samples; ++i) {
    const double phi = 0.5 * std::numbers::pi * i / (samples - 1);
    out.push_back({phi, nxx(e.cx + e.ax * std::cos(phi), e.cy + e.ay * std::sin(phi))});
  }
  return out;
}

}  // namespace fvk::bench

#include "screener/app/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace screener::app {

namespace {

Json vec_json(const Vec& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  for (auto& s : out) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  }
  return out;
}

}  // namespace

const char* tool_version() { return SCREENER_VERSION; }

Json envelope(const std::string& command) {
  Json j;
  j["schema"] = kReportSchema;
  j["tool"] = "screener";
  j["version"] = tool_version();
  j["command"] = command;
  return j;
}

Json to_json(const SolveReport& r) {
  Json j;
  j["method"] = to_string(r.method);
  j["status"] = r.status;
  j["iterations"] = r.iterations;
  j["energy"] = r.energy;
  j["stationarity"] = r.stationarity;
  j["feasibility"] = r.feasibility;
  j["convex_objective"] = r.convex_objective;
  j["h1_smoke_pass"] = r.h1_smoke_pass;
  j["rho"] = r.rho;
  j["energy_trace"] = r.energy_trace;
  return j;
}

Json to_json(const FeasibilityReport& r) {
  return {{"feasible", r.feasible},
          {"worst", r.worst},
          {"worst_scaled", r.worst_scaled},
          {"node", r.node},
          {"family", r.family}};
}

Json to_json(const HolderEstimate& e) {
  Json scales = Json::array();
  for (const auto& s : e.scales) scales.push_back({{"scale", s.scale}, {"sup", s.sup}, {"pairs", s.pairs}});
  return {{"alpha", e.alpha},         {"slope", e.slope},   {"r_squared", e.r_squared},
          {"pair_count", e.pair_count}, {"margin", e.margin}, {"degenerate", e.degenerate},
          {"scales", scales}};
}

Json to_json(const GrowthFit& f) {
  Json table = Json::array();
  for (const auto& r : f.table) table.push_back({{"r", r.r}, {"h", r.h}, {"node", r.node}});
  return {{"x0", vec_json(f.x0)},     {"y0", vec_json(f.y0)},
          {"slope", f.slope},         {"intercept", f.intercept},
          {"r_squared", f.r_squared}, {"table", table}};
}

Json to_json(const AuditReport& r) {
  Json samples = Json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"node", s.node},
                       {"r", s.r},
                       {"h", s.h},
                       {"delta_energy", s.delta_energy},
                       {"f1_gap", s.f1_gap},
                       {"section_size", s.section_size},
                       {"section_measure", s.section_measure}});
  }
  Json j;
  j["epsilon"] = r.epsilon;
  j["requested"] = r.requested;
  j["evaluated"] = r.evaluated;
  j["skipped_empty"] = r.skipped_empty;
  j["skipped_nonpositive"] = r.skipped_nonpositive;
  j["skipped_infeasible"] = r.skipped_infeasible;
  j["min_difference"] = r.min_difference;
  j["tol"] = r.tol;
  j["pass"] = r.pass;
  j["fit"] = {{"ok", r.fit_ok}, {"c1", r.c1}, {"c2", r.c2}};
  j["samples"] = samples;
  return j;
}

Json to_json(const RuledRegionReport& r) {
  return {{"measure", r.measure},       {"region_size", r.region_size},
          {"vacuous", r.vacuous},       {"consistent", r.consistent},
          {"worst", r.worst},           {"worst_node", r.worst_node}};
}

Json to_json(const VerificationReport& r) {
  Json violations = Json::array();
  for (const auto& v : r.violations) {
    violations.push_back(
        {{"x", vec_json(v.x)}, {"y", vec_json(v.y)}, {"gap", v.gap}, {"bound", v.bound}});
  }
  return {{"q", r.q},
          {"c", r.c},
          {"form", to_string(r.form)},
          {"samples", r.samples},
          {"violation_count", r.violation_count},
          {"worst_ratio", r.worst_ratio},
          {"violations", violations},
          {"pass", r.pass()}};
}

Json to_json(const ReferenceComparison& c) {
  return {{"q", c.q},
          {"linf_error", c.linf_error},
          {"energy", c.energy},
          {"exact_energy", c.exact_energy},
          {"energy_gap", c.energy_gap},
          {"el_residual_sup", c.el_residual_sup}};
}

Json to_json(const TwistReport& r) {
  return {{"samples", r.samples},         {"min_abs_det", r.min_abs_det},
          {"witness_x", vec_json(r.witness_x)}, {"witness_y", vec_json(r.witness_y)},
          {"threshold", r.threshold},     {"pass", r.pass}};
}

Json to_json(const CrossCurvatureReport& r) {
  return {{"samples", r.samples},
          {"min_value", r.min_value},
          {"witness_x", vec_json(r.witness_x)},
          {"witness_y", vec_json(r.witness_y)},
          {"witness_xi", vec_json(r.witness_xi)},
          {"witness_eta", vec_json(r.witness_eta)},
          {"tolerance", r.tolerance},
          {"pass", r.pass}};
}

Json to_json(const H1Report& r) {
  Json violations = Json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"x", vec_json(v.x)},
                          {"p1", vec_json(v.p1)},
                          {"p2", vec_json(v.p2)},
                          {"gap", v.gap},
                          {"bound", v.bound}});
  }
  return {{"samples", r.samples},         {"delta", r.delta},
          {"form", to_string(r.form)},    {"violation_count", r.violation_count},
          {"worst_ratio", r.worst_ratio}, {"violations", violations},
          {"pass", r.pass()}};
}

Json to_json(const H2H3Report& r) {
  return {{"samples", r.samples},
          {"max_ratio_f0", r.max_ratio_f0},
          {"max_ratio_dp", r.max_ratio_dp},
          {"max_ratio_mixed", r.max_ratio_mixed},
          {"tolerance", r.tolerance},
          {"pass", r.pass}};
}

std::string render(const Json& report) { return report.dump(2) + "\n"; }

std::string solution_csv(const ConvexGrid& u) {
  const GridDomain& d = u.domain();
  Mat g = gradient_field(u);
  std::string out = d.dim == 1 ? "x,u,du\n" : "x1,x2,u,du1,du2\n";
  for (std::size_t k = 0; k < d.size(); ++k) {
    Vec x = d.point(k);
    std::string line;
    for (int a = 0; a < d.dim; ++a) line += format_g17(x[a]) + ",";
    line += format_g17(u[k]);
    for (int a = 0; a < d.dim; ++a) line += "," + format_g17(g(static_cast<Eigen::Index>(k), a));
    out += line + "\n";
  }
  return out;
}

std::vector<double> read_solution_csv(std::string_view text, const GridDomain& domain) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line != "\r") lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw InvalidArgument("solution file is empty");
  auto header = split(lines.front(), ',');
  const std::size_t want = static_cast<std::size_t>(2 * domain.dim + 1);
  auto u_col = std::find(header.begin(), header.end(), "u");
  if (header.size() != want || u_col == header.end() ||
      u_col - header.begin() != domain.dim)
    throw InvalidArgument("solution header does not match a " + std::to_string(domain.dim) +
                          "-d grid");
  if (lines.size() - 1 != domain.size())
    throw InvalidArgument("solution has " + std::to_string(lines.size() - 1) + " rows, grid has " +
                          std::to_string(domain.size()) + " nodes");
  std::vector<double> values(domain.size());
  for (std::size_t k = 0; k < domain.size(); ++k) {
    auto cells = split(lines[k + 1], ',');
    if (cells.size() != want)
      throw InvalidArgument("solution row " + std::to_string(k + 2) + " has the wrong width");
    std::vector<double> num(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      char* end = nullptr;
      num[c] = std::strtod(cells[c].c_str(), &end);
      if (cells[c].empty() || *end != '\0')
        throw InvalidArgument("solution row " + std::to_string(k + 2) + " is not numeric");
    }
    Vec x = domain.point(k);
    for (int a = 0; a < domain.dim; ++a) {
      double tol = 1e-9 * (1.0 + std::abs(x[a]));
      if (std::abs(num[static_cast<std::size_t>(a)] - x[a]) > tol)
        throw InvalidArgument("solution row " + std::to_string(k + 2) +
                              " does not sit on the configured grid");
    }
    values[k] = num[static_cast<std::size_t>(domain.dim)];
  }
  return values;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory", path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write", path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed", path);
}

}  // namespace screener::app

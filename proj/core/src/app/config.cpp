#include "screener/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace screener::app {

ValidationError::ValidationError(std::vector<std::string> issues)
    : Error([&] {
        std::string msg = "invalid configuration";
        for (const auto& s : issues) msg += "\n  " + s;
        return msg;
      }()),
      issues_(std::move(issues)) {}

namespace {

const std::vector<std::string> kModelTypes{"rochet_chone", "power_source", "log_power",
                                           "linear_tariff"};
const std::vector<std::string> kPreferenceKinds{"bilinear", "separable_concave",
                                                "rank_one_perturbed", "custom"};
const std::vector<std::string> kPotentials{"quadratic", "hyperbolic", "zero"};

bool one_of(const std::string& s, const std::vector<std::string>& options) {
  return std::find(options.begin(), options.end(), s) != options.end();
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

std::string type_name(const Json& j) { return j.type_name(); }

class Reader {
 public:
  Reader(const Json& node, std::string path, std::vector<std::string>& issues)
      : node_(node), path_(std::move(path)), issues_(issues) {}

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json* find(const std::string& key) {
    known_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  bool number(const std::string& key, double& out) {
    const Json* j = find(key);
    if (!j) return false;
    if (!j->is_number()) return mismatch(key, "a number", *j);
    out = j->get<double>();
    return true;
  }

  template <class Int>
  bool integer(const std::string& key, Int& out) {
    const Json* j = find(key);
    if (!j) return false;
    if (!j->is_number_integer()) return mismatch(key, "an integer", *j);
    if constexpr (std::is_unsigned_v<Int>) {
      if (j->is_number_unsigned()) {
        out = static_cast<Int>(j->get<std::uint64_t>());
        return true;
      }
      if (j->get<std::int64_t>() < 0) {
        issues_.push_back(key_path(key) + " must be non-negative");
        return false;
      }
    }
    out = static_cast<Int>(j->get<std::int64_t>());
    return true;
  }

  bool text(const std::string& key, std::string& out) {
    const Json* j = find(key);
    if (!j) return false;
    if (!j->is_string()) return mismatch(key, "a string", *j);
    out = j->get<std::string>();
    return true;
  }

  bool flag(const std::string& key, bool& out) {
    const Json* j = find(key);
    if (!j) return false;
    if (!j->is_boolean()) return mismatch(key, "true or false", *j);
    out = j->get<bool>();
    return true;
  }

  bool numbers(const std::string& key, std::vector<double>& out) {
    const Json* j = find(key);
    if (!j) return false;
    if (!j->is_array()) return mismatch(key, "an array of numbers", *j);
    std::vector<double> v;
    for (const auto& e : *j) {
      if (!e.is_number()) return mismatch(key, "an array of numbers", *j);
      v.push_back(e.get<double>());
    }
    out = std::move(v);
    return true;
  }

  bool integers(const std::string& key, std::vector<int>& out) {
    const Json* j = find(key);
    if (!j) return false;
    if (!j->is_array()) return mismatch(key, "an array of integers", *j);
    std::vector<int> v;
    for (const auto& e : *j) {
      if (!e.is_number_integer()) return mismatch(key, "an array of integers", *j);
      v.push_back(static_cast<int>(e.get<std::int64_t>()));
    }
    out = std::move(v);
    return true;
  }

  /// nullptr when absent or not an object (the latter is reported).
  const Json* object(const std::string& key) {
    const Json* j = find(key);
    if (!j) return nullptr;
    if (!j->is_object()) {
      mismatch(key, "an object", *j);
      return nullptr;
    }
    return j;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!known_.count(it.key())) issues_.push_back("unknown key " + key_path(it.key()));
    }
  }

  std::vector<std::string>& issues() { return issues_; }

 private:
  bool mismatch(const std::string& key, const char* expected, const Json& got) {
    issues_.push_back(key_path(key) + " must be " + expected + " (got " + type_name(got) + ")");
    return false;
  }

  const Json& node_;
  std::string path_;
  std::vector<std::string>& issues_;
  std::set<std::string> known_;
};

void read_profile(Reader& parent, const std::string& key, ScalarProfile& out) {
  const Json* j = parent.find(key);
  if (!j) return;
  const std::string path = parent.key_path(key);
  if (j->is_string()) {
    if (j->get<std::string>() == "uniform") {
      out = ScalarProfile::constant(1.0);
    } else {
      parent.issues().push_back(path + " must be \"uniform\", a number or a table");
    }
    return;
  }
  if (j->is_number()) {
    out = ScalarProfile::constant(j->get<double>());
    return;
  }
  if (!j->is_object()) {
    parent.issues().push_back(path + " must be \"uniform\", a number or a table");
    return;
  }
  Reader r(*j, path, parent.issues());
  int axis = 0;
  std::vector<double> knots, values;
  r.integer("axis", axis);
  if (!r.numbers("knots", knots)) parent.issues().push_back(path + ".knots is required");
  if (!r.numbers("values", values)) parent.issues().push_back(path + ".values is required");
  r.finish();
  out.kind = ScalarProfile::Kind::piecewise_linear;
  out.axis = axis;
  out.knots = std::move(knots);
  out.values = std::move(values);
}

void read_domain(Reader& root, DomainBlock& d) {
  const Json* j = root.object("domain");
  if (!j) return;
  Reader r(*j, "domain", root.issues());
  r.integer("dim", d.dim);
  r.numbers("lower", d.lower);
  r.numbers("upper", d.upper);
  r.integers("nodes", d.nodes);
  r.finish();
}

void read_model(Reader& root, ModelBlock& m, bool& q_given) {
  const Json* j = root.object("model");
  if (!j) return;
  Reader r(*j, "model", root.issues());
  r.text("type", m.type);
  q_given = r.number("q", m.q);
  read_profile(r, "gamma", m.gamma);
  read_profile(r, "source", m.source);
  r.number("coefficient", m.coefficient);
  r.number("delta", m.delta);
  const Json* part = r.object("participation");
  const Json* pin = r.object("pinned");
  if (part && pin) r.issues().push_back("model: give either participation or pinned, not both");
  if (part) {
    Reader p(*part, "model.participation", r.issues());
    m.boundary = BoundaryMode::participation;
    p.number("a0", m.a0);
    p.numbers("y0", m.y0);
    p.finish();
  } else if (pin) {
    Reader p(*pin, "model.pinned", r.issues());
    m.boundary = BoundaryMode::pinned;
    p.number("value", m.pinned_value);
    p.finish();
  }
  r.finish();
}

void read_preference(Reader& root, PreferenceBlock& pb) {
  const Json* j = root.object("preference");
  if (!j) return;
  Reader r(*j, "preference", root.issues());
  PreferenceSpec& s = pb.spec;
  r.text("kind", s.kind);
  r.text("name", s.name);
  r.text("potential", s.potential);
  r.number("potential_scale", s.potential_scale);
  r.text("y_potential", s.y_potential);
  r.number("y_potential_scale", s.y_potential_scale);
  r.numbers("a", s.a);
  if (const Json* params = r.object("params")) {
    for (auto it = params->begin(); it != params->end(); ++it) {
      if (!it->is_number()) {
        r.issues().push_back("preference.params." + it.key() + " must be a number");
        continue;
      }
      s.params[it.key()] = it->get<double>();
    }
  }
  r.numbers("y_lower", pb.y_lower);
  r.numbers("y_upper", pb.y_upper);
  r.finish();
}

void read_solver(Reader& root, SolverConfig& s) {
  const Json* j = root.object("solver");
  if (!j) return;
  Reader r(*j, "solver", root.issues());
  std::string method = to_string(s.method);
  if (r.text("method", method)) {
    if (method == "admm") {
      s.method = SolverMethod::admm;
    } else if (method == "projected_gradient") {
      s.method = SolverMethod::projected_gradient;
    } else {
      r.issues().push_back("solver.method must be admm or projected_gradient (got " + method + ")");
    }
  }
  std::string rule = to_string(s.step_rule);
  if (r.text("step_rule", rule)) {
    if (rule == "fixed") {
      s.step_rule = StepRule::fixed;
    } else if (rule == "diminishing") {
      s.step_rule = StepRule::diminishing;
    } else if (rule == "backtracking") {
      s.step_rule = StepRule::backtracking;
    } else {
      r.issues().push_back("solver.step_rule must be fixed, diminishing or backtracking (got " +
                           rule + ")");
    }
  }
  r.integer("max_iterations", s.max_iterations);
  r.number("step_size", s.step_size);
  r.number("armijo", s.armijo);
  r.number("energy_tol", s.energy_tol);
  r.number("stationarity_tol", s.stationarity_tol);
  r.number("rho", s.rho);
  r.integer("check_every", s.check_every);
  r.number("init_quadratic", s.init_quadratic);
  r.number("init_noise", s.init_noise);
  if (const Json* p = r.object("projection")) {
    Reader pr(*p, "solver.projection", r.issues());
    pr.number("tol", s.projection.tol);
    pr.integer("max_sweeps", s.projection.max_sweeps);
    pr.number("relaxation", s.projection.relaxation);
    pr.finish();
  }
  r.finish();
}

void read_analysis(Reader& root, AnalysisBlock& a) {
  const Json* j = root.object("analysis");
  if (!j) return;
  Reader r(*j, "analysis", root.issues());
  r.number("margin", a.margin);
  r.numbers("radii", a.radii);
  r.numbers("x0", a.x0);
  r.integer("samples", a.samples);
  r.number("epsilon", a.epsilon);
  r.number("r_min", a.r_min);
  r.number("r_max", a.r_max);
  r.number("audit_tol", a.audit_tol);
  r.number("ruled_tol", a.ruled_tol);
  r.integer("check_samples", a.check_samples);
  r.finish();
}

void read_output(Reader& root, OutputBlock& o) {
  const Json* j = root.object("output");
  if (!j) return;
  Reader r(*j, "output", root.issues());
  r.text("directory", o.directory);
  r.text("report", o.report);
  r.text("analysis_report", o.analysis_report);
  r.text("check_report", o.check_report);
  r.text("solution", o.solution);
  r.flag("plots", o.plots);
  r.finish();
}

void fill_defaults(RunConfig& c, bool q_given) {
  if (c.analysis.radii.empty()) {
    for (int k = 0; k < 8; ++k) c.analysis.radii.push_back(0.05 * std::pow(8.0, k / 7.0));
  }
  if (c.model.type == "log_power" && !q_given) c.model.q = 2.0;
  c.solver.seed = c.seed;
  const int n = (c.domain.dim == 1 || c.domain.dim == 2) ? c.domain.dim : 0;
  if (n == 0) return;
  const auto un = static_cast<std::size_t>(n);
  if (c.domain.lower.empty()) c.domain.lower.assign(un, 1.0);
  if (c.domain.upper.empty()) c.domain.upper.assign(un, 2.0);
  if (c.domain.nodes.empty()) c.domain.nodes.assign(un, n == 1 ? 201 : 33);
  if (c.model.y0.empty()) c.model.y0.assign(un, 0.0);
  if (c.preference.y_lower.empty()) c.preference.y_lower.assign(un, -10.0);
  if (c.preference.y_upper.empty()) c.preference.y_upper.assign(un, 10.0);
  if (c.analysis.x0.empty() && c.domain.lower.size() == un && c.domain.upper.size() == un) {
    for (std::size_t a = 0; a < un; ++a)
      c.analysis.x0.push_back(0.5 * (c.domain.lower[a] + c.domain.upper[a]));
  }
}

bool check_profile(const ScalarProfile& p, const std::string& path, int dim,
                   std::vector<std::string>& issues) {
  try {
    p.validate();
  } catch (const Error& e) {
    issues.push_back(path + ": " + e.what());
    return false;
  }
  if (p.kind == ScalarProfile::Kind::piecewise_linear && (p.axis < 0 || p.axis >= dim)) {
    issues.push_back(path + ".axis must index a domain axis");
    return false;
  }
  return true;
}

bool finite_all(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void collect_issues(const RunConfig& c, std::vector<std::string>& issues) {
  const auto& d = c.domain;
  const bool dim_ok = d.dim == 1 || d.dim == 2;
  if (!dim_ok) {
    issues.push_back("domain.dim must be 1 or 2 (got " + std::to_string(d.dim) +
                     "); higher dimensions are unsupported");
  }
  const auto n = static_cast<std::size_t>(dim_ok ? d.dim : 0);
  bool domain_ok = dim_ok;
  auto sized = [&](const auto& v, const std::string& path) {
    if (!dim_ok) return false;
    if (v.size() != n) {
      issues.push_back(path + " must have " + std::to_string(n) + " entries");
      return false;
    }
    return true;
  };
  domain_ok &= sized(d.lower, "domain.lower");
  domain_ok &= sized(d.upper, "domain.upper");
  domain_ok &= sized(d.nodes, "domain.nodes");
  if (domain_ok) {
    for (std::size_t a = 0; a < n; ++a) {
      if (!(std::isfinite(d.lower[a]) && std::isfinite(d.upper[a]) && d.lower[a] < d.upper[a])) {
        issues.push_back("domain.lower must be below domain.upper on every axis");
        domain_ok = false;
      }
      if (d.nodes[a] < 3) {
        issues.push_back("domain.nodes must be at least 3 per axis");
        domain_ok = false;
      }
    }
  }

  const auto& m = c.model;
  if (!one_of(m.type, kModelTypes))
    issues.push_back("model.type must be one of " + join(kModelTypes) + " (got " + m.type + ")");
  if (!(m.q > 1.0) || !std::isfinite(m.q)) issues.push_back("q must exceed 1");
  if (m.type == "log_power" && m.q != 2.0) issues.push_back("model.q must be 2 for log_power");
  bool gamma_ok = check_profile(m.gamma, "model.gamma", d.dim, issues);
  check_profile(m.source, "model.source", d.dim, issues);
  if (gamma_ok && (m.type == "rochet_chone" || m.type == "linear_tariff") &&
      !(m.gamma.min() > 0.0))
    issues.push_back("model.gamma must be positive for " + m.type);
  if (m.coefficient == 0.0 || !std::isfinite(m.coefficient))
    issues.push_back("model.coefficient must be positive (or negative for 1/q)");
  if (!(m.delta > 0.0)) issues.push_back("model.delta must be positive");
  if (m.boundary == BoundaryMode::participation) {
    if (!sized(m.y0, "model.participation.y0")) domain_ok = false;
    if (!std::isfinite(m.a0)) issues.push_back("model.participation.a0 must be finite");
  }
  if (!std::isfinite(m.pinned_value)) issues.push_back("model.pinned.value must be finite");

  const auto& p = c.preference;
  bool pref_ok = true;
  if (!one_of(p.spec.kind, kPreferenceKinds)) {
    issues.push_back("preference.kind must be one of " + join(kPreferenceKinds) + " (got " +
                     p.spec.kind + ")");
    pref_ok = false;
  }
  if (p.spec.kind == "custom" && !one_of(p.spec.name, custom_preference_names())) {
    issues.push_back("preference.name must be one of " + join(custom_preference_names()) +
                     " (got '" + p.spec.name + "')");
    pref_ok = false;
  }
  if (!one_of(p.spec.potential, kPotentials)) {
    issues.push_back("preference.potential must be one of " + join(kPotentials));
    pref_ok = false;
  }
  if (!one_of(p.spec.y_potential, kPotentials)) {
    issues.push_back("preference.y_potential must be one of " + join(kPotentials));
    pref_ok = false;
  }
  if (p.spec.kind == "rank_one_perturbed" && !sized(p.spec.a, "preference.a")) pref_ok = false;
  pref_ok &= sized(p.y_lower, "preference.y_lower");
  pref_ok &= sized(p.y_upper, "preference.y_upper");
  if (pref_ok) {
    for (std::size_t a = 0; a < n; ++a) {
      if (!(p.y_lower[a] < p.y_upper[a]) || !finite_all(p.y_lower) || !finite_all(p.y_upper)) {
        issues.push_back("preference.y_lower must be below preference.y_upper on every axis");
        pref_ok = false;
        break;
      }
    }
  }
  if (pref_ok && m.boundary == BoundaryMode::participation && m.y0.size() == n) {
    for (std::size_t a = 0; a < n; ++a) {
      if (m.y0[a] < p.y_lower[a] || m.y0[a] > p.y_upper[a]) {
        issues.push_back("model.participation.y0 must lie in the product box");
        break;
      }
    }
  }
  if (pref_ok && domain_ok) {
    try {
      Box x{Eigen::Map<const Vec>(d.lower.data(), d.dim), Eigen::Map<const Vec>(d.upper.data(), d.dim)};
      Box y{Eigen::Map<const Vec>(p.y_lower.data(), d.dim),
            Eigen::Map<const Vec>(p.y_upper.data(), d.dim)};
      make_preference(p.spec, x, y);
    } catch (const Error& e) {
      issues.push_back(std::string("preference: ") + e.what());
    }
  }

  try {
    c.solver.validate();
  } catch (const Error& e) {
    issues.push_back(std::string("solver: ") + e.what());
  }
  if (!(c.solver.projection.relaxation > 0.0 && c.solver.projection.relaxation < 2.0))
    issues.push_back("solver.projection.relaxation must lie in (0, 2)");
  if (c.solver.projection.max_sweeps < 1)
    issues.push_back("solver.projection.max_sweeps must be at least 1");

  const auto& an = c.analysis;
  if (!(an.margin >= 0.0)) issues.push_back("analysis.margin must be non-negative");
  if (domain_ok) {
    for (std::size_t a = 0; a < n; ++a) {
      if (!(2.0 * an.margin < d.upper[a] - d.lower[a])) {
        issues.push_back("analysis.margin leaves no interior");
        break;
      }
    }
  }
  if (an.radii.empty() || !std::all_of(an.radii.begin(), an.radii.end(),
                                       [](double r) { return r > 0.0 && std::isfinite(r); }))
    issues.push_back("analysis.radii must be positive");
  if (sized(an.x0, "analysis.x0") && domain_ok) {
    for (std::size_t a = 0; a < n; ++a) {
      if (!(an.x0[a] >= d.lower[a] && an.x0[a] <= d.upper[a])) {
        issues.push_back("analysis.x0 must lie in the domain");
        break;
      }
    }
  }
  if (an.samples < 1) issues.push_back("analysis.samples must be at least 1");
  if (an.check_samples < 1) issues.push_back("analysis.check_samples must be at least 1");
  if (!(an.epsilon > 0.0 && an.epsilon < 1.0)) issues.push_back("analysis.epsilon must lie in (0, 1)");
  if (!(an.r_min > 0.0 && an.r_max >= an.r_min))
    issues.push_back("analysis radii must satisfy 0 < r_min <= r_max");
  if (!(an.audit_tol >= 0.0)) issues.push_back("analysis.audit_tol must be non-negative");
  if (!(an.ruled_tol >= 0.0)) issues.push_back("analysis.ruled_tol must be non-negative");

  if (c.output.report.empty() || c.output.analysis_report.empty() || c.output.check_report.empty())
    issues.push_back("output report names must not be empty");
  if (c.output.solution.empty()) issues.push_back("output.solution must not be empty");
  if (c.output.directory.empty()) issues.push_back("output.directory must not be empty");
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col > 1 ? col - 1 : 1};
}

Json profile_json(const ScalarProfile& p) {
  if (p.kind == ScalarProfile::Kind::constant) return p.level;
  Json j;
  j["axis"] = p.axis;
  j["knots"] = p.knots;
  j["values"] = p.values;
  return j;
}

Box make_box(const std::vector<double>& lo, const std::vector<double>& hi) {
  const auto n = static_cast<Eigen::Index>(lo.size());
  return Box{Eigen::Map<const Vec>(lo.data(), n), Eigen::Map<const Vec>(hi.data(), n)};
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte);
    throw ParseError("config is not valid JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(col),
                     line, col);
  }
  if (!root.is_object()) throw ParseError("config must be a JSON object", 1, 1);

  RunConfig c;
  std::vector<std::string> issues;
  Reader r(root, "", issues);
  r.integer("seed", c.seed);
  read_domain(r, c.domain);
  bool q_given = false;
  read_model(r, c.model, q_given);
  read_preference(r, c.preference);
  read_solver(r, c.solver);
  read_analysis(r, c.analysis);
  read_output(r, c.output);
  r.finish();
  fill_defaults(c, q_given);
  collect_issues(c, issues);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& config) {
  std::vector<std::string> issues;
  collect_issues(config, issues);
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

Json to_json(const RunConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["domain"] = {{"dim", c.domain.dim},
                 {"lower", c.domain.lower},
                 {"upper", c.domain.upper},
                 {"nodes", c.domain.nodes}};
  Json m;
  m["type"] = c.model.type;
  m["q"] = c.model.q;
  m["gamma"] = profile_json(c.model.gamma);
  m["source"] = profile_json(c.model.source);
  m["coefficient"] = c.model.coefficient;
  m["delta"] = c.model.delta;
  if (c.model.boundary == BoundaryMode::pinned) {
    m["pinned"] = {{"value", c.model.pinned_value}};
  } else {
    m["participation"] = {{"a0", c.model.a0}, {"y0", c.model.y0}};
  }
  j["model"] = m;
  Json p;
  const auto& s = c.preference.spec;
  p["kind"] = s.kind;
  p["name"] = s.name;
  p["potential"] = s.potential;
  p["potential_scale"] = s.potential_scale;
  p["y_potential"] = s.y_potential;
  p["y_potential_scale"] = s.y_potential_scale;
  p["a"] = s.a;
  Json params = Json::object();
  for (const auto& [k, v] : s.params) params[k] = v;
  p["params"] = params;
  p["y_lower"] = c.preference.y_lower;
  p["y_upper"] = c.preference.y_upper;
  j["preference"] = p;
  const auto& sv = c.solver;
  j["solver"] = {{"method", to_string(sv.method)},
                 {"max_iterations", sv.max_iterations},
                 {"step_rule", to_string(sv.step_rule)},
                 {"step_size", sv.step_size},
                 {"armijo", sv.armijo},
                 {"energy_tol", sv.energy_tol},
                 {"stationarity_tol", sv.stationarity_tol},
                 {"rho", sv.rho},
                 {"check_every", sv.check_every},
                 {"init_quadratic", sv.init_quadratic},
                 {"init_noise", sv.init_noise},
                 {"projection",
                  {{"tol", sv.projection.tol},
                   {"max_sweeps", sv.projection.max_sweeps},
                   {"relaxation", sv.projection.relaxation}}}};
  const auto& a = c.analysis;
  j["analysis"] = {{"margin", a.margin},     {"radii", a.radii},         {"x0", a.x0},
                   {"samples", a.samples},   {"epsilon", a.epsilon},     {"r_min", a.r_min},
                   {"r_max", a.r_max},       {"audit_tol", a.audit_tol}, {"ruled_tol", a.ruled_tol},
                   {"check_samples", a.check_samples}};
  j["output"] = {{"directory", c.output.directory},
                 {"report", c.output.report},
                 {"analysis_report", c.output.analysis_report},
                 {"check_report", c.output.check_report},
                 {"solution", c.output.solution},
                 {"plots", c.output.plots}};
  return j;
}

Problem build_problem(const RunConfig& c) {
  validate(c);
  Problem p;
  const auto& d = c.domain;
  p.domain = d.dim == 1 ? GridDomain::line(d.lower[0], d.upper[0], d.nodes[0])
                        : GridDomain::rectangle(d.lower[0], d.upper[0], d.nodes[0], d.lower[1],
                                                d.upper[1], d.nodes[1]);
  Box x = p.domain.box();
  Box y = make_box(c.preference.y_lower, c.preference.y_upper);
  p.preference = make_preference(c.preference.spec, x, y);

  const auto& m = c.model;
  if (m.type == "rochet_chone") {
    p.model = rochet_chone(m.q, m.gamma, x);
  } else if (m.type == "power_source") {
    p.model = power_source(m.q, m.source, x, m.coefficient);
  } else if (m.type == "log_power") {
    p.model = log_power(m.source, x);
  } else {
    p.model = linear_tariff(m.gamma, x, m.delta);
  }

  if (m.boundary == BoundaryMode::pinned) {
    p.constraint = ConstraintSet::pinned(p.domain, m.pinned_value);
    p.constraint.adapt_to(p.domain, *p.preference);
  } else {
    Vec y0 = Eigen::Map<const Vec>(m.y0.data(), d.dim);
    p.constraint = ConstraintSet::participation(p.domain, *p.preference, m.a0, y0);
  }
  return p;
}

}  // namespace screener::app

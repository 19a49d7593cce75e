#include "screener/app/run.hpp"

#include <cmath>
#include <cstdio>

#include "screener/app/svg.hpp"

namespace screener::app {

namespace {

Json problem_json(const Problem& p) {
  return {{"model", p.model.name},
          {"q", p.model.q},
          {"delta", p.model.delta},
          {"form", to_string(p.model.form)},
          {"preference", p.preference->name()},
          {"preference_kind", to_string(p.preference->kind())},
          {"boundary", to_string(p.constraint.mode)},
          {"nodes", p.domain.size()}};
}

std::vector<double> gradient_norms(const ConvexGrid& u) {
  Mat g = gradient_field(u);
  std::vector<double> out(static_cast<std::size_t>(g.rows()));
  for (Eigen::Index k = 0; k < g.rows(); ++k) out[static_cast<std::size_t>(k)] = g.row(k).norm();
  return out;
}

std::vector<double> axis_coordinates(const GridDomain& d) {
  std::vector<double> x(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) x[k] = d.point(k)[0];
  return x;
}

void add_solution_plots(const ConvexGrid& u, RunOutput& out) {
  const GridDomain& d = u.domain();
  std::vector<double> du = gradient_norms(u);
  if (d.dim == 1) {
    Mat g = gradient_field(u);
    std::vector<double> x = axis_coordinates(d);
    std::vector<double> slope(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) slope[k] = g(static_cast<Eigen::Index>(k), 0);
    out.artifacts.push_back(
        {"solution.svg", line_chart({{"u", x, u.values(), false}, {"du", x, slope, false}},
                                    {"computed solution", "x", "value", false, false})});
  } else {
    out.artifacts.push_back({"u.svg", level_sets(d, u.values(), "level sets of u")});
    out.artifacts.push_back({"grad.svg", level_sets(d, du, "level sets of |Du|")});
  }
}

std::string format_q(double q) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", q);
  return buf;
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

RunOutput run_solve(const RunConfig& config) {
  Problem p = build_problem(config);
  RunOutput out;
  out.report = envelope("solve");
  out.report["config"] = to_json(config);
  out.report["problem"] = problem_json(p);

  std::optional<SolveResult> result;
  try {
    result.emplace(solve(p.model, *p.preference, p.domain, p.constraint, config.solver));
  } catch (const MaxIterations& e) {
    result.emplace(e.best());
    out.report["message"] = e.what();
  } catch (const Error& e) {
    out.report["solve"] = {{"status", "incomplete"}};
    out.report["message"] = e.what();
    out.code = ExitCode::incomplete;
    return out;
  }
  out.report["solve"] = to_json(result->report);
  out.report["feasibility"] = to_json(is_feasible(result->solution));
  if (result->report.status != "converged") out.code = ExitCode::incomplete;
  out.artifacts.push_back({config.output.solution, solution_csv(result->solution)});
  if (config.output.plots) add_solution_plots(result->solution, out);
  return out;
}

RunOutput run_analyze(const RunConfig& config, std::string_view solution_text) {
  Problem p = build_problem(config);
  ConvexGrid u(p.domain, read_solution_csv(solution_text, p.domain), p.constraint);
  const auto& a = config.analysis;
  RunOutput out;
  out.report = envelope("analyze");
  out.report["config"] = to_json(config);
  out.report["problem"] = problem_json(p);
  bool pass = true;

  try {
    out.report["holder"] = to_json(estimate_holder(u, a.margin));
  } catch (const Error& e) {
    out.report["holder"] = {{"error", e.what()}};
  }

  Json growth;
  std::optional<GrowthFit> fit;
  try {
    Vec x0 = to_vec(a.x0);
    Vec y0 = support_selection(u, *p.preference, nearest_node(p.domain, x0));
    fit = growth_exponent(u, x0, a.radii, *p.preference, y0);
    growth = to_json(*fit);
  } catch (const Error& e) {
    growth = {{"error", e.what()}};
  }
  out.report["growth"] = growth;

  AuditSpec spec;
  spec.samples = a.samples;
  spec.seed = config.seed;
  spec.epsilon = a.epsilon;
  spec.r_min = a.r_min;
  spec.r_max = a.r_max;
  spec.margin = a.margin;
  spec.tol = a.audit_tol;
  try {
    AuditReport audit = audit_minimality(u, p.model, *p.preference, spec);
    out.report["audit"] = to_json(audit);
    pass = pass && audit.pass;
  } catch (const Error& e) {
    out.report["audit"] = {{"error", e.what()}, {"pass", false}};
    pass = false;
  }

  RuledRegionReport ruled = detect_ruled(u, ruled_query(p.model, p.domain, a.ruled_tol));
  out.report["ruled"] = to_json(ruled);
  pass = pass && (ruled.vacuous || ruled.consistent);
  out.report["pass"] = pass;
  if (!pass) out.code = ExitCode::check_failed;

  if (config.output.plots && fit) {
    std::vector<double> r, h;
    for (const auto& row : fit->table) {
      r.push_back(row.r);
      h.push_back(row.h);
    }
    std::vector<double> line;
    for (double ri : r) line.push_back(std::exp(fit->intercept) * std::pow(ri, fit->slope));
    out.artifacts.push_back(
        {"growth.svg", line_chart({{"h(r)", r, h, true}, {"fit", r, line, false}},
                                  {"growth of the support defect", "r", "h", true, true})});
  }
  return out;
}

RunOutput run_check_preference(const RunConfig& config) {
  Problem p = build_problem(config);
  SampleSpec s;
  s.count = config.analysis.check_samples;
  s.seed = config.seed;
  s.min_dim = s.max_dim = p.domain.dim;
  RunOutput out;
  out.report = envelope("check-preference");
  out.report["config"] = to_json(config);
  out.report["problem"] = problem_json(p);
  bool pass = true;
  auto guarded = [&](const char* key, auto&& body) {
    try {
      auto r = body();
      out.report[key] = to_json(r);
      pass = pass && out.report[key]["pass"].template get<bool>();
    } catch (const Error& e) {
      out.report[key] = {{"error", e.what()}, {"pass", false}};
      pass = false;
    }
  };
  guarded("twist", [&] { return check_twist(*p.preference, s); });
  guarded("cross_curvature", [&] { return check_cross_curvature(*p.preference, s); });
  guarded("h1", [&] { return check_H1(p.model, *p.preference, s); });
  guarded("h2_h3", [&] { return check_H2_H3(p.model, *p.preference, s); });
  out.report["pass"] = pass;
  if (!pass) out.code = ExitCode::check_failed;
  return out;
}

RunOutput run_verify_q(double q, std::optional<double> c, const SampleSpec& samples) {
  if (!(q > 1.0)) throw InvalidArgument("q must exceed 1");
  double constant = c ? *c : derive_c(q).c;
  VerificationReport r = verify_strong_convexity(q, constant, samples);
  RunOutput out;
  out.report = envelope("verify q");
  out.report["seed"] = samples.seed;
  Json body = to_json(r);
  for (auto it = body.begin(); it != body.end(); ++it) out.report[it.key()] = *it;
  if (!r.pass()) out.code = ExitCode::check_failed;
  return out;
}

RunOutput run_verify_log(const SampleSpec& samples) {
  VerificationReport r = verify_log_convexity(samples);
  RunOutput out;
  out.report = envelope("verify log");
  out.report["seed"] = samples.seed;
  Json body = to_json(r);
  for (auto it = body.begin(); it != body.end(); ++it) out.report[it.key()] = *it;
  if (!r.pass()) out.code = ExitCode::check_failed;
  return out;
}

RunOutput run_reference_1d(double q, int nodes, const SolverConfig& solver, bool plots) {
  ReferenceProblem ref = reference_problem(q, nodes);
  RunOutput out;
  out.report = envelope("reference-1d");
  out.report["q"] = q;
  out.report["nodes"] = nodes;
  std::optional<SolveResult> result;
  try {
    result.emplace(solve(ref.model, *ref.preference, ref.domain, ref.constraint, solver));
  } catch (const MaxIterations& e) {
    result.emplace(e.best());
    out.report["message"] = e.what();
  }
  if (result->report.status != "converged") out.code = ExitCode::incomplete;
  out.report["solve"] = to_json(result->report);
  out.report["comparison"] = to_json(compare(result->solution, q));
  out.artifacts.push_back({"solution.csv", solution_csv(result->solution)});
  if (plots) {
    const GridDomain& d = ref.domain;
    std::vector<double> x = axis_coordinates(d);
    std::vector<double> ue(d.size()), de(d.size()), dc(d.size());
    Mat g = gradient_field(result->solution);
    for (std::size_t k = 0; k < d.size(); ++k) {
      ue[k] = exact_solution(q, x[k]);
      de[k] = exact_derivative(q, x[k]);
      dc[k] = g(static_cast<Eigen::Index>(k), 0);
    }
    out.artifacts.push_back(
        {"reference.svg",
         line_chart({{"u exact", x, ue, false},
                     {"u computed", x, result->solution.values(), true},
                     {"u' exact", x, de, false},
                     {"u' computed", x, dc, true}},
                    {"reference problem, q = " + format_q(q), "x", "value", false, false})});
  }
  return out;
}

void emit(const RunOutput& output, const std::filesystem::path& directory,
          const std::string& report_name) {
  write_file(directory / report_name, render(output.report));
  for (const auto& a : output.artifacts) write_file(directory / a.name, a.content);
}

}  // namespace screener::app

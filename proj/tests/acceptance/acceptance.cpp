#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "screener/analysis.hpp"
#include "screener/app/config.hpp"
#include "screener/app/report.hpp"
#include "screener/app/run.hpp"
#include "screener/convexgrid.hpp"
#include "screener/parallel.hpp"
#include "screener/preference.hpp"
#include "screener/qconvex.hpp"
#include "screener/reference1d.hpp"
#include "screener/solver.hpp"

using namespace screener;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

SolveResult solve_reference(double q) {
  auto ref = reference_problem(q, 201);
  return solve(ref.model, *ref.preference, ref.domain, ref.constraint, SolverConfig{});
}

std::vector<double> growth_radii() {
  std::vector<double> r;
  for (int k = 0; k < 8; ++k) r.push_back(0.05 * std::pow(8.0, k / 7.0));
  return r;
}

Outcome exact_reproduction() {
  Outcome o{true, ""};
  for (double q : {2.0, 3.0, 4.0}) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = solve_reference(q);
    double t = seconds_since(t0);
    double err = linf(r.solution.values(), exact_samples(q, r.solution.domain()));
    double e = exact_energy(q);
    double gap = std::abs(r.report.energy - e);
    bool ok = err <= 5e-3 && gap <= 1e-3 * std::abs(e) && t <= 60.0;
    o.pass = o.pass && ok;
    o.detail += fmt("q=%g linf=%.2e energy_gap=%.2e t=%.1fs; ", q, err, gap, t);
  }
  return o;
}

Outcome holder_recovery() {
  double a3 = estimate_holder(solve_reference(3.0).solution, 0.1).alpha;
  double a4 = estimate_holder(solve_reference(4.0).solution, 0.1).alpha;
  bool ok = a3 >= 0.43 && a3 <= 0.57 && a4 >= 0.27 && a4 <= 0.40;
  return {ok, fmt("alpha(q=3)=%.4f alpha(q=4)=%.4f", a3, a4)};
}

Outcome growth_scaling() {
  auto r = solve_reference(3.0);
  const auto& u = r.solution;
  auto ref = reference_problem(3.0, 201);
  Vec x0 = Vec::Zero(1);
  Vec y0 = support_selection(u, *ref.preference, nearest_node(u.domain(), x0));
  auto radii = growth_radii();
  auto fit = growth_exponent(u, x0, radii, *ref.preference, y0);
  return {fit.slope >= 1.45, fmt("slope=%.4f r2=%.4f", fit.slope, fit.r_squared)};
}

Outcome convexity_suite() {
  auto t0 = std::chrono::steady_clock::now();
  std::size_t violations = 0;
  std::size_t runs = 0;
  for (int dim : {1, 2, 3}) {
    SampleSpec s;
    s.count = 100000;
    s.min_dim = s.max_dim = dim;
    s.seed = 1000 + static_cast<std::uint64_t>(dim);
    for (double q : {2.0, 2.5, 3.0, 4.0}) {
      violations += verify_strong_convexity(q, derive_c(q).c, s).violation_count;
      ++runs;
    }
    for (double q : {1.2, 1.5}) {
      violations += verify_strong_convexity(q, 0.5 * q * (q - 1.0), s).violation_count;
      ++runs;
    }
  }
  SampleSpec s;
  s.count = 100000;
  violations += verify_log_convexity(s).violation_count;
  ++runs;
  double t = seconds_since(t0);
  return {violations == 0 && t <= 30.0,
          fmt("%zu suites of 1e5 pairs, violations=%zu, t=%.1fs", runs, violations, t)};
}

Outcome b_toolkit() {
  const Box x = Box::cube(2, -1.0, 1.0), y = Box::cube(2, -20.0, 20.0);
  Vec a(2);
  a << 0.5, -0.25;
  auto bil = make_bilinear(x, y);
  auto sep = make_separable_concave(x, y, ConvexPotential::hyperbolic(0.8), ConvexPotential::quadratic(0.3));
  auto rank = make_rank_one_perturbed(x, y, ConvexPotential::quadratic(0.4), a);
  auto rng = stream_rng(55, 0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Vec xs(2), p(2);
    for (int i = 0; i < 2; ++i) {
      xs[i] = uniform(rng, -1.0, 1.0);
      p[i] = uniform(rng, -3.0, 3.0);
    }
    worst = std::max(worst, (b_exponential(*bil, xs, p) - p).norm());
    Vec dF = 0.8 * xs / std::sqrt(1.0 + xs.squaredNorm());
    worst = std::max(worst, (b_exponential(*sep, xs, p) - (p + dF)).norm());
    Mat m = Mat::Identity(2, 2) + (0.4 * xs) * a.transpose();
    worst = std::max(worst, (b_exponential(*rank, xs, p) - m.partialPivLu().solve(p)).norm());
  }

  std::vector<Vec> xg, yg;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) xg.push_back((Vec(2) << -1.0 + 0.4 * i, -1.0 + 0.4 * j).finished());
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) yg.push_back((Vec(2) << -2.0 + 4.0 * i / 6, -2.0 + 4.0 * j / 6).finished());
  double idem = 0.0;
  for (int t = 0; t < 100; ++t) {
    auto r = stream_rng(77, static_cast<std::uint64_t>(t));
    std::vector<double> u(xg.size());
    for (auto& e : u) e = uniform(r, -1.0, 1.0);
    auto once = double_transform(*sep, xg, yg, u);
    auto twice = double_transform(*sep, xg, yg, once);
    idem = std::max(idem, linf(once, twice));
  }

  SampleSpec s;
  s.count = 1000;
  auto cb = check_cross_curvature(*bil, s);
  auto cs = check_cross_curvature(*sep, s);
  bool ok = worst <= 1e-8 && idem <= 1e-9 && cb.pass && cs.pass && cb.min_value >= -1e-8 &&
            cs.min_value >= -1e-8;
  return {ok, fmt("closed-form error=%.2e idempotence=%.2e cross-curvature min %.2e / %.2e", worst,
                  idem, cb.min_value, cs.min_value)};
}

Outcome projection() {
  auto d3 = GridDomain::line(0.0, 1.0, 3);
  auto hand = project_convex(std::vector<double>{0.0, 1.0, 0.0}, d3, ConstraintSet::convex_only(d3));
  double hand_err = 0.0;
  for (double v : hand.values()) hand_err = std::max(hand_err, std::abs(v - 1.0 / 3.0));

  double idem = 0.0;
  bool feasible = true;
  for (int dim : {1, 2}) {
    auto d = dim == 1 ? GridDomain::line(-1.0, 1.0, 21) : GridDomain::rectangle(0.0, 1.0, 7, 0.0, 1.0, 7);
    auto c = ConstraintSet::convex_only(d);
    ConvexProjector proj(d, c);
    for (int t = 0; t < 1000; ++t) {
      auto rng = stream_rng(99 + static_cast<std::uint64_t>(dim), static_cast<std::uint64_t>(t));
      std::vector<double> v(d.size());
      for (auto& e : v) e = uniform(rng, -1.0, 1.0);
      auto p = proj.project(v).values;
      auto pp = proj.project(p).values;
      idem = std::max(idem, linf(p, pp));
      feasible = feasible && is_feasible(ConvexGrid(d, p, c)).feasible;
    }
  }
  return {hand_err <= 1e-9 && idem <= 1e-8 && feasible,
          fmt("hand error=%.2e idempotence=%.2e feasible=%s", hand_err, idem, feasible ? "yes" : "no")};
}

Outcome minimality_audit() {
  auto d = GridDomain::rectangle(1.0, 2.0, 33, 1.0, 2.0, 33);
  auto b = make_bilinear(d.box(), Box::cube(2, -10.0, 10.0));
  auto m = rochet_chone(2.0, ScalarProfile::constant(1.0), d.box());
  auto c = ConstraintSet::participation(d, *b, 0.0, Vec::Zero(2));
  auto r = solve(m, *b, d, c, SolverConfig{});
  AuditSpec spec;
  spec.samples = 200;
  spec.epsilon = 0.5;
  auto a = audit_minimality(r.solution, m, *b, spec);
  return {a.pass && a.min_difference >= -1e-6 && a.evaluated > 0,
          fmt("evaluated=%zu empty=%zu min difference=%.2e", a.evaluated, a.skipped_empty,
              a.min_difference)};
}

Outcome ruled_region() {
  auto d = GridDomain::line(-1.0, 1.0, 201);
  auto b = make_bilinear(d.box(), Box::cube(1, -10.0, 10.0));
  auto f = ScalarProfile::piecewise_linear(0, {-1.0, -0.35, -0.3, 0.3, 0.35, 1.0},
                                           {1.0, 1.0, -1.0, -1.0, 1.0, 1.0});
  auto m = power_source(3.0, f, d.box(), 1.0);
  auto r = solve(m, *b, d, ConstraintSet::pinned(d, 0.0), SolverConfig{});
  const auto& u = r.solution.values();
  const double h = d.spacing(0);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < d.size(); ++k) {
    if (std::abs(d.point(k)[0]) > 0.3 + 1e-12) continue;
    worst = std::max(worst, (u[k - 1] - 2.0 * u[k] + u[k + 1]) / (h * h));
  }
  auto report = detect_ruled(r.solution, ruled_query(m, d, 1e-6 * h * h));
  return {worst <= 1e-6 && report.consistent && !report.vacuous,
          fmt("max scaled second difference on [-0.3, 0.3]=%.2e region=%zu", worst, report.region_size)};
}

Outcome determinism() {
  auto config = app::parse_config(R"({
    "seed": 17,
    "domain": {"dim": 2, "nodes": [17, 17]},
    "model": {"type": "rochet_chone", "q": 2.5},
    "solver": {"init_noise": 0.01}
  })");
  std::string first = app::render(app::run_solve(config).report);
  std::string second = app::render(app::run_solve(config).report);
  return {first == second, fmt("%zu report bytes", first.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1D exact-solution reproduction", exact_reproduction},
      {"optimal Holder exponent recovery", holder_recovery},
      {"growth exponent scaling", growth_scaling},
      {"strong convexity property suite", convexity_suite},
      {"b-toolkit oracles", b_toolkit},
      {"projection correctness", projection},
      {"minimality audit", minimality_audit},
      {"ruled region structure", ruled_region},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

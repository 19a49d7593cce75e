#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "screener/errors.hpp"
#include "screener/reference1d.hpp"
#include "screener/solver.hpp"

using namespace screener;

namespace {

double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

SolveResult solve_or_best(const Functional& m, const PreferenceFunction& b, const GridDomain& d,
                          const ConstraintSet& c, const SolverConfig& cfg) {
  try {
    return solve(m, b, d, c, cfg);
  } catch (const MaxIterations& e) {
    return e.best();
  }
}

bool non_increasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] > trace[i - 1] + 1e-12 * (1.0 + std::abs(trace[i - 1]))) return false;
  return true;
}

}  // namespace

TEST_CASE("SolverConfig validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.armijo = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.check_every = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("with F1 = 0 the solution is the participation bound") {
  auto d = GridDomain::line(1.0, 2.0, 41);
  auto b = make_bilinear(d.box(), Box::cube(1, -10.0, 10.0));
  Functional m = power_source(2.0, ScalarProfile::constant(1.0), d.box());
  m.f1 = [](const Vec&, const Vec&) { return 0.0; };
  m.f1_grad = [](const Vec&, const Vec& y) { return Vec::Zero(y.size()); };
  m.f1_hess = [](const Vec&, const Vec& y) { return Mat::Zero(y.size(), y.size()); };
  auto c = ConstraintSet::participation(d, *b, 0.3, Vec::Constant(1, 0.5));
  for (auto method : {SolverMethod::admm, SolverMethod::projected_gradient}) {
    SolverConfig cfg;
    cfg.method = method;
    auto r = solve_or_best(m, *b, d, c, cfg);
    CHECK(linf(r.solution.values(), c.lower_bound) <= 1e-6);
  }
}

TEST_CASE("one-dimensional q = 3 matches the exact minimizer") {
  auto ref = reference_problem(3.0, 201);
  SolverConfig cfg;
  auto r = solve(ref.model, *ref.preference, ref.domain, ref.constraint, cfg);
  CHECK(r.report.status == "converged");
  CHECK(linf(r.solution.values(), exact_samples(3.0, ref.domain)) <= 5e-3);
  CHECK(r.report.feasibility >= -1e-8);
  CHECK(is_feasible(r.solution).feasible);
}

TEST_CASE("refinement at least halves the error") {
  for (double q : {2.0, 3.0, 4.0}) {
    double prev = 0.0;
    for (int n : {51, 101, 201}) {
      auto ref = reference_problem(q, n);
      auto r = solve(ref.model, *ref.preference, ref.domain, ref.constraint, SolverConfig{});
      double err = linf(r.solution.values(), exact_samples(q, ref.domain));
      if (n > 51) CHECK(err <= 0.5 * prev);
      prev = err;
    }
  }
}

TEST_CASE("two-dimensional Rochet-Chone q = 2") {
  auto d = GridDomain::rectangle(1.0, 2.0, 33, 1.0, 2.0, 33);
  auto b = make_bilinear(d.box(), Box::cube(2, -10.0, 10.0));
  auto m = rochet_chone(2.0, ScalarProfile::constant(1.0), d.box());
  auto c = ConstraintSet::participation(d, *b, 0.0, Vec::Zero(2));
  auto r = solve(m, *b, d, c, SolverConfig{});
  CHECK(r.report.status == "converged");
  CHECK(non_increasing(r.report.energy_trace));
  CHECK(r.report.stationarity <= 1e-6);
  CHECK(is_feasible(r.solution).feasible);
  CHECK(r.report.energy == doctest::Approx(r.report.energy_trace.back()));
  CHECK(r.report.energy == doctest::Approx(evaluate_energy(m, *b, r.solution)));
}

TEST_CASE("backtracking projected gradient has a monotone trace") {
  auto d = GridDomain::line(1.0, 2.0, 41);
  auto b = make_bilinear(d.box(), Box::cube(1, -10.0, 10.0));
  auto m = rochet_chone(2.5, ScalarProfile::constant(1.0), d.box());
  auto c = ConstraintSet::participation(d, *b, 0.0, Vec::Zero(1));
  SolverConfig cfg;
  cfg.method = SolverMethod::projected_gradient;
  cfg.max_iterations = 3000;
  cfg.init_noise = 0.05;
  auto r = solve_or_best(m, *b, d, c, cfg);
  REQUIRE(r.report.energy_trace.size() > 2);
  CHECK(non_increasing(r.report.energy_trace));
  CHECK(is_feasible(r.solution).feasible);
}

TEST_CASE("scaling gamma scales the trace and keeps the minimizer") {
  auto d = GridDomain::line(1.0, 2.0, 61);
  auto b = make_bilinear(d.box(), Box::cube(1, -10.0, 10.0));
  auto c = ConstraintSet::participation(d, *b, 0.0, Vec::Zero(1));
  auto gamma = ScalarProfile::piecewise_linear(0, {1.0, 2.0}, {1.0, 2.0});
  auto scaled = ScalarProfile::piecewise_linear(0, {1.0, 2.0}, {3.0, 6.0});
  SolverConfig cfg;
  auto r1 = solve(rochet_chone(2.0, gamma, d.box()), *b, d, c, cfg);
  auto r3 = solve(rochet_chone(2.0, scaled, d.box()), *b, d, c, cfg);
  CHECK(linf(r1.solution.values(), r3.solution.values()) <= 1e-6);
  CHECK(r3.report.energy == doctest::Approx(3.0 * r1.report.energy).epsilon(1e-6));
}

TEST_CASE("MaxIterations carries a feasible best iterate") {
  auto ref = reference_problem(3.0, 101);
  SolverConfig cfg;
  cfg.max_iterations = 2;
  cfg.check_every = 1;
  try {
    solve(ref.model, *ref.preference, ref.domain, ref.constraint, cfg);
    FAIL("expected MaxIterations");
  } catch (const MaxIterations& e) {
    CHECK(e.best().report.status == "incomplete");
    CHECK(is_feasible(e.best().solution).feasible);
  }
}

TEST_CASE("initial iterate is feasible and deterministic") {
  auto d = GridDomain::rectangle(1.0, 2.0, 9, 1.0, 2.0, 9);
  auto b = make_bilinear(d.box(), Box::cube(2, -10.0, 10.0));
  auto c = ConstraintSet::participation(d, *b, 0.1, Vec::Constant(2, 0.5));
  SolverConfig cfg;
  cfg.init_noise = 0.1;
  cfg.seed = 42;
  auto a = initial_iterate(d, c, cfg);
  CHECK(a == initial_iterate(d, c, cfg));
  CHECK(is_feasible(ConvexGrid(d, a, c)).feasible);
  cfg.seed = 43;
  CHECK(a != initial_iterate(d, c, cfg));
}

TEST_CASE("el_residual_1d") {
  const int n = 101;
  const double h = 2.0 / (n - 1);
  std::vector<double> quad, aff;
  for (int i = 0; i < n; ++i) {
    double x = -1.0 + h * i;
    quad.push_back(0.5 * x * x);
    aff.push_back(0.3 * x + 1.0);
  }
  auto rq = el_residual_1d(quad, 2.0, h);
  CHECK(rq.field.size() == static_cast<std::size_t>(n - 2));
  CHECK(rq.sup <= 1e-10);
  auto ra = el_residual_1d(aff, 2.0, h);
  for (double v : ra.field) CHECK(v == doctest::Approx(-1.0));
  CHECK(ra.sup == doctest::Approx(1.0));

  // away from x = 0 the residual of the exact solution shrinks under refinement
  double prev = 0.0;
  for (int m : {201, 401, 801}) {
    double hm = 2.0 / (m - 1);
    auto d = GridDomain::line(-1.0, 1.0, m);
    auto r = el_residual_1d(exact_samples(3.0, d), 3.0, hm);
    double away = 0.0;
    for (std::size_t i = 0; i < r.field.size(); ++i) {
      double x = -1.0 + hm * static_cast<double>(i + 1);
      if (std::abs(x) >= 0.25) away = std::max(away, std::abs(r.field[i]));
    }
    if (m > 201) CHECK(away <= 0.5 * prev);
    prev = away;
  }
}

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "screener/app/config.hpp"
#include "screener/app/report.hpp"
#include "screener/app/run.hpp"

namespace fs = std::filesystem;
using namespace screener;
using namespace screener::app;

namespace {

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::vector<std::string> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.issues();
  }
  return {};
}

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("screener_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kSmall1d = R"({
  "seed": 3,
  "domain": {"dim": 1, "nodes": [41]},
  "model": {"type": "rochet_chone", "q": 2.5}
})";

}  // namespace

TEST_CASE("minimal config gets defaults") {
  auto c = parse_config(R"({"model": {"type": "rochet_chone", "q": 3}})");
  CHECK(c.seed == 1);
  CHECK(c.domain.dim == 1);
  CHECK(c.domain.lower == std::vector<double>{1.0});
  CHECK(c.domain.upper == std::vector<double>{2.0});
  CHECK(c.domain.nodes == std::vector<int>{201});
  CHECK(c.model.q == 3.0);
  CHECK(c.model.boundary == BoundaryMode::participation);
  CHECK(c.model.y0 == std::vector<double>{0.0});
  CHECK(c.preference.spec.kind == "bilinear");
  CHECK(c.solver.seed == 1);
  CHECK(c.analysis.radii.size() == 8);
  CHECK(c.analysis.radii.front() == doctest::Approx(0.05));
  CHECK(c.analysis.radii.back() == doctest::Approx(0.4));
  CHECK(c.analysis.x0 == std::vector<double>{1.5});
  CHECK(c.output.report == "report.json");

  auto c2 = parse_config(R"({"seed": 9, "domain": {"dim": 2}})");
  CHECK(c2.domain.nodes == std::vector<int>{33, 33});
  CHECK(c2.solver.seed == 9);
}

TEST_CASE("validation collects every violation") {
  auto q1 = issues_of(R"({"model": {"q": 1}})");
  CHECK(mentions(q1, "q must exceed 1"));

  auto many = issues_of(R"({"domain": {"dim": 3}, "model": {"q": 1, "gama": 2}, "solver": {"methd": "x"}})");
  CHECK(mentions(many, "domain.dim must be 1 or 2"));
  CHECK(mentions(many, "q must exceed 1"));
  CHECK(mentions(many, "unknown key model.gama"));
  CHECK(mentions(many, "unknown key solver.methd"));

  CHECK(mentions(issues_of(R"({"seed": "one"})"), "seed"));
  CHECK(mentions(issues_of(R"({"model": {"participation": {"a0": 0}, "pinned": {"value": 0}}})"), "pinned"));
  CHECK(mentions(issues_of(R"({"preference": {"kind": "custom", "name": "nope"}})"), "nope"));
  CHECK_THROWS_AS(parse_config(R"({"domain": {"dim": 3}})"), ValidationError);
}

TEST_CASE("malformed JSON reports the line") {
  std::string text = "{\n  \"seed\": 1,\n  \"model\": {\n    \"q\": ,\n  }\n}";
  try {
    parse_config(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[1, 2]"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/screener.json"), IoError);
}

TEST_CASE("resolved config round-trips") {
  auto c = parse_config(R"({"seed": 5, "domain": {"dim": 2, "nodes": [9, 11]},
    "model": {"type": "rochet_chone", "q": 2.5, "gamma": {"axis": 1, "knots": [1, 2], "values": [1, 2]}},
    "preference": {"kind": "separable_concave", "potential": "hyperbolic", "potential_scale": 0.5},
    "solver": {"method": "projected_gradient", "max_iterations": 77}})");
  auto j = to_json(c);
  auto again = parse_config(j.dump());
  CHECK(to_json(again) == j);
  CHECK(again.solver.method == SolverMethod::projected_gradient);
  CHECK(again.solver.max_iterations == 77);
  CHECK(again.model.gamma.axis == 1);
}

TEST_CASE("solve reports are deterministic") {
  auto c = parse_config(kSmall1d);
  auto a = run_solve(c), b = run_solve(c);
  CHECK(a.code == ExitCode::ok);
  CHECK(render(a.report) == render(b.report));
  CHECK(a.report["schema"] == kReportSchema);
  CHECK(a.report["command"] == "solve");
  CHECK(a.report["solve"]["status"] == "converged");
  REQUIRE_FALSE(a.artifacts.empty());
  CHECK(a.artifacts.front().content == b.artifacts.front().content);
  CHECK(a.artifacts.front().content.rfind("x,u,du\n", 0) == 0);
}

TEST_CASE("exhausted iteration budget is incomplete") {
  auto c = parse_config(R"({"domain": {"nodes": [41]}, "solver": {"max_iterations": 1, "check_every": 1}})");
  auto out = run_solve(c);
  CHECK(out.code == ExitCode::incomplete);
  CHECK(out.report["solve"]["status"] == "incomplete");
}

TEST_CASE("analyze reads back a solution") {
  auto c = parse_config(kSmall1d);
  auto solved = run_solve(c);
  auto out = run_analyze(c, solved.artifacts.front().content);
  CHECK(out.report["command"] == "analyze");
  CHECK(out.report.contains("audit"));
  CHECK(out.code == ExitCode::ok);
  CHECK_THROWS(run_analyze(c, "x1,x2,u\n1,2,3\n"));
}

TEST_CASE("verify exit codes") {
  SampleSpec s;
  s.count = 5000;
  CHECK(run_verify_q(3.0, std::nullopt, s).code == ExitCode::ok);
  auto bad = run_verify_q(4.0, 10.0, s);
  CHECK(bad.code == ExitCode::check_failed);
  CHECK(bad.report["pass"] == false);
  CHECK(run_verify_log(s).code == ExitCode::ok);
}

TEST_CASE("check-preference") {
  auto out = run_check_preference(parse_config(R"({"domain": {"dim": 2, "nodes": [5, 5]}, "analysis": {"check_samples": 300}})"));
  CHECK(out.code == ExitCode::ok);
  CHECK(out.report["twist"]["pass"] == true);
  auto deg = run_check_preference(parse_config(
      R"({"domain": {"dim": 2, "nodes": [5, 5]}, "preference": {"kind": "custom", "name": "degenerate_twist"}, "analysis": {"check_samples": 300}})"));
  CHECK(deg.code == ExitCode::check_failed);
}

TEST_CASE("solution csv") {
  auto d = GridDomain::rectangle(0.0, 1.0, 3, 0.0, 2.0, 4);
  std::vector<double> v(d.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = 0.1 * static_cast<double>(k);
  ConvexGrid u(d, v, ConstraintSet::convex_only(d));
  auto text = solution_csv(u);
  CHECK(text.rfind("x1,x2,u,du1,du2\n", 0) == 0);
  CHECK(read_solution_csv(text, d) == v);
  CHECK_THROWS(read_solution_csv(text, GridDomain::rectangle(0.0, 1.0, 4, 0.0, 2.0, 3)));
}

#ifdef SCREENER_BIN
namespace {

int run_bin(const std::string& args) {
  std::string cmd = std::string(SCREENER_BIN) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("command line exit codes") {
  auto dir = scratch_dir("bin");
  write(dir / "ok.json", kSmall1d);
  write(dir / "bad.json", R"({"domain": {"dim": 3}})");
  write(dir / "broken.json", "{\"seed\": ");
  write(dir / "short.json", R"({"domain": {"nodes": [41]}, "solver": {"max_iterations": 1, "check_every": 1}})");

  CHECK(run_bin("solve --config " + (dir / "ok.json").string() + " --out " + (dir / "a").string()) == 0);
  CHECK(run_bin("solve --config " + (dir / "ok.json").string() + " --out " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
  CHECK(fs::exists(dir / "a" / "solution.csv"));
  CHECK(run_bin("analyze --config " + (dir / "ok.json").string() + " --solution " +
                (dir / "a" / "solution.csv").string() + " --out " + (dir / "a").string()) == 0);
  CHECK(fs::exists(dir / "a" / "analysis.json"));

  CHECK(run_bin("solve --config " + (dir / "bad.json").string()) == 3);
  CHECK(run_bin("solve --config " + (dir / "broken.json").string()) == 3);
  CHECK(run_bin("solve --config " + (dir / "short.json").string() + " --out " + (dir / "c").string()) == 2);
  CHECK(run_bin("solve") == 3);
  CHECK(run_bin("verify q --q 3 --samples 2000") == 0);
  CHECK(run_bin("verify q --q 4 --c 10 --samples 2000") == 1);
  CHECK(run_bin("verify log --samples 2000") == 0);
  CHECK(run_bin("verify q --q 1 --samples 10") == 3);
  CHECK(run_bin("reference-1d --q 3 --n 101 --out " + (dir / "ref").string()) == 0);
  CHECK(fs::exists(dir / "ref" / "report.json"));
  fs::remove_all(dir.parent_path());
}
#endif

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "screener/app/run.hpp"

namespace fs = std::filesystem;
using namespace screener;
using namespace screener::app;

namespace {

int code(ExitCode c) { return static_cast<int>(c); }

fs::path output_dir(const RunConfig& config, const std::string& override_dir) {
  return override_dir.empty() ? fs::path(config.output.directory) : fs::path(override_dir);
}

int finish(const RunOutput& out, const fs::path& dir, const std::string& report_name) {
  emit(out, dir, report_name);
  std::cout << (dir / report_name).string() << "\n";
  return code(out.code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convexity-constrained screening problems: solve, audit, verify"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir, solution_path;

  auto* solve_cmd = app.add_subcommand("solve", "Solve the configured problem");
  solve_cmd->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--out", out_dir, "Output directory (overrides output.directory)");

  auto* analyze_cmd = app.add_subcommand("analyze", "Regularity audits of a solution");
  analyze_cmd->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--solution", solution_path, "Solution CSV from solve")
      ->required()
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--out", out_dir, "Output directory (overrides output.directory)");

  auto* check_cmd = app.add_subcommand("check-preference", "Structural checks of b and the model");
  check_cmd->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--out", out_dir, "Output directory (overrides output.directory)");

  auto* verify_cmd = app.add_subcommand("verify", "Sampled convexity inequalities");
  verify_cmd->require_subcommand(1);
  SampleSpec samples;
  samples.count = 100000;
  std::string verify_out;
  double q = 3.0;
  std::optional<double> c;
  auto* vq = verify_cmd->add_subcommand("q", "|y|^q separation from the tangent plane");
  vq->add_option("--q", q, "Exponent")->required();
  vq->add_option("--c", c, "Constant (default: certified c(q))");
  auto* vlog = verify_cmd->add_subcommand("log", "|p| ln(1+|p|) separation");
  for (auto* sub : {vq, vlog}) {
    sub->add_option("--samples", samples.count, "Number of pairs");
    sub->add_option("--seed", samples.seed, "Seed");
    sub->add_option("--radius", samples.radius, "Half-width of the sampling box");
    sub->add_option("--min-dim", samples.min_dim, "Smallest dimension")->check(CLI::Range(1, 16));
    sub->add_option("--max-dim", samples.max_dim, "Largest dimension")->check(CLI::Range(1, 16));
    sub->add_option("--out", verify_out, "Also write the report to this file");
  }

  auto* ref_cmd = app.add_subcommand("reference-1d", "Solve and compare with the exact 1-d minimizer");
  int nodes = 201;
  bool plots = false;
  std::string ref_out = ".";
  ref_cmd->add_option("--q", q, "Exponent")->required();
  ref_cmd->add_option("--n", nodes, "Grid nodes")->check(CLI::Range(3, 1000000));
  ref_cmd->add_option("--out", ref_out, "Output directory")->capture_default_str();
  ref_cmd->add_flag("--plots", plots, "Write an SVG overlay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return code(ExitCode::config_error);
  }

  try {
    if (solve_cmd->parsed()) {
      RunConfig config = load_config(config_path);
      RunOutput out = run_solve(config);
      return finish(out, output_dir(config, out_dir), config.output.report);
    }
    if (analyze_cmd->parsed()) {
      RunConfig config = load_config(config_path);
      RunOutput out = run_analyze(config, read_file(solution_path));
      return finish(out, output_dir(config, out_dir), config.output.analysis_report);
    }
    if (check_cmd->parsed()) {
      RunConfig config = load_config(config_path);
      RunOutput out = run_check_preference(config);
      return finish(out, output_dir(config, out_dir), config.output.check_report);
    }
    if (verify_cmd->parsed()) {
      if (samples.min_dim > samples.max_dim) throw InvalidArgument("--min-dim exceeds --max-dim");
      RunOutput out = vq->parsed() ? run_verify_q(q, c, samples) : run_verify_log(samples);
      std::string text = render(out.report);
      std::cout << text;
      if (!verify_out.empty()) write_file(verify_out, text);
      return code(out.code);
    }
    if (ref_cmd->parsed()) {
      SolverConfig solver;
      RunOutput out = run_reference_1d(q, nodes, solver, plots);
      emit(out, ref_out, "report.json");
      std::cout << render(out.report["comparison"]);
      return code(out.code);
    }
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return code(ExitCode::config_error);
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return code(ExitCode::config_error);
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return code(ExitCode::config_error);
  } catch (const InvalidArgument& e) {
    std::cerr << e.what() << "\n";
    return code(ExitCode::config_error);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return code(ExitCode::incomplete);
  }
  return code(ExitCode::config_error);
}

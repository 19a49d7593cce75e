#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "screener/app/config.hpp"
#include "screener/app/report.hpp"

// Subcommand bodies. Each returns the report and any side files; nothing
// is written until emit() is called, so runs can be compared in memory.

namespace screener::app {

struct Artifact {
  std::string name;  // relative to the output directory
  std::string content;
};

struct RunOutput {
  Json report;
  ExitCode code = ExitCode::ok;
  std::vector<Artifact> artifacts;
};

/// Solves the configured problem. The report carries the resolved config;
/// MaxIterations yields status "incomplete", the best iterate and code 2.
RunOutput run_solve(const RunConfig& config);

/// Holder exponent, growth, minimality audit and ruled-region check on a
/// solution CSV written by run_solve. Code 1 when the audit fails or a
/// non-empty ruled region is inconsistent.
RunOutput run_analyze(const RunConfig& config, std::string_view solution_csv);

/// Twist, cross-curvature, H1 and H2/H3 checks of the configured model.
RunOutput run_check_preference(const RunConfig& config);

/// c defaults to the certified derive_c(q) constant of the natural form.
RunOutput run_verify_q(double q, std::optional<double> c, const SampleSpec& samples);
RunOutput run_verify_log(const SampleSpec& samples);

/// Solve and compare on the pinned 1-d reference problem.
RunOutput run_reference_1d(double q, int nodes, const SolverConfig& solver, bool plots);

/// Writes the rendered report to directory/report_name and every artifact.
void emit(const RunOutput& output, const std::filesystem::path& directory,
          const std::string& report_name);

}  // namespace screener::app

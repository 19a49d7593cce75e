#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "screener/analysis.hpp"
#include "screener/convexgrid.hpp"
#include "screener/errors.hpp"
#include "screener/model.hpp"
#include "screener/preference.hpp"
#include "screener/solver.hpp"

namespace screener::app {

using Json = nlohmann::ordered_json;

/// Malformed JSON. line and column are 1-based; key is set when the
/// problem is tied to a key rather than to the text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column, std::string key = {})
      : Error(what), line_(line), column_(column), key_(std::move(key)) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& key() const { return key_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string key_;
};

/// Well-formed but invalid configuration; carries every violation found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::filesystem::path path)
      : Error(what + ": " + path.string()), path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct DomainBlock {
  int dim = 1;
  std::vector<double> lower;  // defaults: 1 per axis
  std::vector<double> upper;  // defaults: 2 per axis
  std::vector<int> nodes;     // defaults: 201 in 1-d, 33 in 2-d
};

struct ModelBlock {
  std::string type = "rochet_chone";  // rochet_chone | power_source | log_power | linear_tariff
  double q = 2.0;
  ScalarProfile gamma = ScalarProfile::constant(1.0);   // rochet_chone, linear_tariff
  ScalarProfile source = ScalarProfile::constant(1.0);  // power_source, log_power
  double coefficient = -1.0;  // power_source; negative selects 1/q
  double delta = 1.0;         // linear_tariff
  BoundaryMode boundary = BoundaryMode::participation;
  double a0 = 0.0;
  std::vector<double> y0;     // defaults to the origin
  double pinned_value = 0.0;
};

struct PreferenceBlock {
  PreferenceSpec spec;
  std::vector<double> y_lower;  // defaults: -10 per axis
  std::vector<double> y_upper;  // defaults: 10 per axis
};

struct AnalysisBlock {
  double margin = 0.1;
  std::vector<double> radii;  // defaults: 8 geometric radii in [0.05, 0.4]
  std::vector<double> x0;     // defaults to the center of the domain
  std::size_t samples = 200;
  double epsilon = 0.5;
  double r_min = 0.05;
  double r_max = 0.3;
  double audit_tol = 1e-6;
  double ruled_tol = 1e-6;
  std::size_t check_samples = 1000;  // check-preference sampling
};

struct OutputBlock {
  std::string directory = ".";
  std::string report = "report.json";
  std::string analysis_report = "analysis.json";
  std::string check_report = "checks.json";
  std::string solution = "solution.csv";
  bool plots = false;
};

struct RunConfig {
  std::uint64_t seed = 1;
  DomainBlock domain;
  ModelBlock model;
  PreferenceBlock preference;
  SolverConfig solver;
  AnalysisBlock analysis;
  OutputBlock output;
};

/// Strict parse: unknown keys and type mismatches are violations. Defaults
/// are filled and the result validated; the solver seed is the run seed.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Throws ValidationError with every violation.
void validate(const RunConfig& config);

/// Fully resolved configuration; parse_config(to_json(c).dump()) reproduces c.
Json to_json(const RunConfig& config);

struct Problem {
  GridDomain domain;
  Functional model;
  PreferencePtr preference;
  ConstraintSet constraint;
};

Problem build_problem(const RunConfig& config);

}  // namespace screener::app

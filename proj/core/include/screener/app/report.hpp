#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "screener/analysis.hpp"
#include "screener/app/config.hpp"
#include "screener/qconvex.hpp"
#include "screener/reference1d.hpp"
#include "screener/solver.hpp"

namespace screener::app {

inline constexpr const char* kReportSchema = "screener.report/1";

enum class ExitCode : int { ok = 0, check_failed = 1, incomplete = 2, config_error = 3 };

const char* tool_version();

/// {schema, tool, version, command}. Reports never carry timings or host
/// details so equal inputs give equal bytes.
Json envelope(const std::string& command);

Json to_json(const SolveReport& report);
Json to_json(const FeasibilityReport& report);
Json to_json(const HolderEstimate& est);
Json to_json(const GrowthFit& fit);
Json to_json(const AuditReport& report);
Json to_json(const RuledRegionReport& report);
Json to_json(const VerificationReport& report);
Json to_json(const ReferenceComparison& cmp);
Json to_json(const TwistReport& report);
Json to_json(const CrossCurvatureReport& report);
Json to_json(const H1Report& report);
Json to_json(const H2H3Report& report);

/// Two-space indented JSON with a trailing newline.
std::string render(const Json& report);

/// Columns: x (or x1, x2), u, du (or du1, du2); values in %.17g.
std::string solution_csv(const ConvexGrid& u);

/// Values in node order. The coordinates must match the domain's nodes.
std::vector<double> read_solution_csv(std::string_view text, const GridDomain& domain);

std::string read_file(const std::filesystem::path& path);
/// Creates parent directories. Throws IoError naming the path.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace screener::app

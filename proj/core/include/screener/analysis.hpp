#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "screener/convexgrid.hpp"
#include "screener/model.hpp"
#include "screener/preference.hpp"

// Empirical regularity audits on grid functions: Holder exponent of the
// gradient, growth of the support defect, sections under b-affine
// comparisons, minimality against max-perturbations, and ruled regions.

namespace screener {

struct HolderOptions {
  int min_scales = 6;
  double degenerate_tol = 1e-12;
};

struct HolderScale {
  double scale = 0.0;  // bin (scale/2, scale]
  double sup = 0.0;    // sup |Du(x) - Du(x')| over the bin
  std::size_t pairs = 0;
};

struct HolderEstimate {
  double alpha = 1.0;
  double slope = 1.0;  // unclamped least-squares slope
  double r_squared = 0.0;
  std::size_t pair_count = 0;
  double margin = 0.0;
  bool degenerate = false;
  std::vector<HolderScale> scales;
};

/// Pairs of nodes at distance >= margin from the boundary are binned into
/// dyadic scales h 2^k; bins fully inside the pair-distance range are used,
/// except the nearest-neighbour bin. alpha is the slope of log sup against
/// log scale, clamped to (0, 1].
/// Throws TooFewPairs when fewer than min_scales bins carry variation.
HolderEstimate estimate_holder(const GridDomain& domain, const Mat& grad, double margin,
                               const HolderOptions& options = {});
HolderEstimate estimate_holder(const ConvexGrid& u, double margin,
                               const HolderOptions& options = {});

/// b-support selection at a node: y0 = y_b(x0, Du(x0)) with the grid gradient.
Vec support_selection(const ConvexGrid& u, const PreferenceFunction& b, std::size_t node);

std::size_t nearest_node(const GridDomain& domain, const Vec& x);

struct GrowthRow {
  double r = 0.0;
  double h = 0.0;
  std::size_t node = 0;  // where the sup is attained
};

struct GrowthFit {
  Vec x0;
  Vec y0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<GrowthRow> table;
};

/// h(r) = sup over B_r(x0) of u - p0 with p0(x) = u(x0) + b(x, y0) - b(x0, y0);
/// x0 snaps to the nearest node. Rows with h <= 0 are kept in the table and
/// left out of the fit. Throws AllZeroDefect when fewer than two rows are positive.
GrowthFit growth_exponent(const ConvexGrid& u, const Vec& x0, std::span<const double> radii,
                          const PreferenceFunction& b, const Vec& y0);

/// {u < p} for a b-affine comparison p.
struct Section {
  Vec x0;
  BAffine comparison;
  double h = 0.0;  // max of p - u over the section (0 when empty)
  double r = 0.0;
  std::vector<std::size_t> nodes;
  double measure = 0.0;  // node count times cell volume
};

Section extract_section(const ConvexGrid& u, const PreferenceFunction& b, const BAffine& p);

struct Comparison {
  BAffine descriptor;
  std::size_t base_node = 0;
  std::size_t peak_node = 0;  // argmax of the defect over the ball
  Vec y0;
  double h = 0.0;        // defect at the peak
  double r = 0.0;
  double r_tilde = 0.0;  // |x~| of the peak in normalized coordinates
  double epsilon = 0.5;
  double value_at_base = 0.0;  // p(x0) - u(x0), positive by construction
};

/// Tilts the b-support at x0 toward the defect peak on the ball of radius r
/// (in normalized coordinates): the new product is
///   y_eps = y_b(x_m, D_x b(x_m, y0) + D_xy b(x_m, y0) (eps h / r~) e1)
/// and the comparison passes through (x_m, u(x_m)). For bilinear b this is
/// y0 + (eps h / r~) e1 and p(x0) - u(x0) = h (1 - eps).
/// Throws NonpositiveDefect when h <= 0.
Comparison build_comparison(const ConvexGrid& u, const PreferenceFunction& b,
                            std::size_t base_node, double r, double epsilon = 0.5);

struct AuditSpec {
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  double epsilon = 0.5;
  double r_min = 0.05;
  double r_max = 0.3;
  double margin = 0.1;
  double tol = 1e-6;
};

struct AuditSample {
  std::size_t node = 0;
  double r = 0.0;
  double h = 0.0;
  double delta_energy = 0.0;  // L(u_h) - L(u)
  double f1_gap = 0.0;        // F1 part of the difference per unit section measure
  std::size_t section_size = 0;
  double section_measure = 0.0;
};

struct AuditReport {
  double epsilon = 0.5;
  std::size_t requested = 0;
  std::size_t evaluated = 0;
  std::size_t skipped_empty = 0;
  std::size_t skipped_nonpositive = 0;
  std::size_t skipped_infeasible = 0;
  std::vector<AuditSample> samples;
  double min_difference = 0.0;
  // f1_gap ~ c1 h - c2 h^q / r^q by least squares
  double c1 = 0.0;
  double c2 = 0.0;
  bool fit_ok = false;
  double tol = 1e-6;
  bool pass = false;
};

/// For sampled (x0, r), builds the comparison, forms u_h = max(u, p) and
/// compares energies. Sections that are empty or that move pinned values are
/// skipped and counted.
AuditReport audit_minimality(const ConvexGrid& u, const Functional& model,
                             const PreferenceFunction& b, const AuditSpec& spec);

struct RuledQuery {
  std::vector<double> f;  // one value per node
  double threshold = 0.0;
  double tolerance = 1e-6;
};

struct RuledRegionReport {
  std::size_t region_size = 0;
  bool vacuous = true;
  bool consistent = true;
  double worst = 0.0;
  std::size_t worst_node = 0;
  std::string measure;  // second_difference | hessian_determinant
};

/// On interior nodes with f <= threshold, tests the raw second difference
/// (1-d) or the determinant of the raw difference Hessian (2-d) against the
/// tolerance.
RuledRegionReport detect_ruled(const ConvexGrid& u, const RuledQuery& query);

/// Source term f of F0 = f(x) z sampled at the nodes.
RuledQuery ruled_query(const Functional& model, const GridDomain& domain, double tolerance = 1e-6);

/// Least-squares line through (x, y); returns {slope, intercept, r^2}.
std::array<double, 3> fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace screener

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "screener/preference.hpp"
#include "screener/types.hpp"

// Grid representation of convex functions on a box in one or two dimensions,
// the discrete convexity cone, and Euclidean projection onto it.

namespace screener {

/// Regular grid on [lower, upper] (per axis). Nodes are ordered
/// lexicographically with axis 0 slowest: k = i * nodes[1] + j.
struct GridDomain {
  int dim = 1;
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{1.0, 0.0};
  std::array<int, 2> nodes{3, 1};

  static GridDomain line(double lo, double hi, int n);
  static GridDomain rectangle(double lo0, double hi0, int n0, double lo1, double hi1, int n1);

  /// Throws InvalidArgument unless dim is 1 or 2, bounds are increasing and
  /// every axis has at least 3 nodes.
  void validate() const;

  double spacing(int axis) const;
  std::size_t size() const;
  std::size_t index(int i, int j = 0) const;
  std::array<int, 2> multi_index(std::size_t k) const;
  Vec point(std::size_t k) const;
  std::vector<Vec> points() const;
  bool on_boundary(std::size_t k) const;
  /// Trapezoidal quadrature weights.
  std::vector<double> weights() const;
  double cell_volume() const;
  Box box() const;
};

using Stencil = std::vector<std::array<int, 2>>;

/// {e1} in 1-d; {e1, e2, e1+e2, e1-e2} in 2-d. `wide` adds the knight moves
/// (2,1), (1,2), (2,-1), (1,-2) in 2-d.
Stencil default_stencil(int dim, bool wide = false);

enum class BoundaryMode { free, participation, pinned };

const char* to_string(BoundaryMode mode);

/// Convexity cone plus the boundary/participation constraints.
///
/// Convexity is imposed on v + shift (shift empty means zero) through
/// directional second differences along the stencil.
struct ConstraintSet {
  Stencil stencil;
  BoundaryMode mode = BoundaryMode::free;
  std::vector<double> lower_bound;  // participation mode: one value per node
  std::vector<double> shift;
  std::vector<std::size_t> pinned_nodes;
  std::vector<double> pinned_values;

  static ConstraintSet convex_only(const GridDomain& domain);
  /// u >= a0 + b(x, y0) at every node.
  static ConstraintSet participation(const GridDomain& domain, const PreferenceFunction& b,
                                     double a0, const Vec& y0);
  /// u = value on every boundary node.
  static ConstraintSet pinned(const GridDomain& domain, double value = 0.0);

  /// Uses the preference's convexifying potential as shift when it has one.
  void adapt_to(const GridDomain& domain, const PreferenceFunction& b);
};

class ConvexGrid {
 public:
  ConvexGrid(GridDomain domain, std::vector<double> values, ConstraintSet constraint);

  const GridDomain& domain() const { return domain_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  const ConstraintSet& constraint() const { return constraint_; }
  double operator[](std::size_t k) const { return values_[k]; }

 private:
  GridDomain domain_;
  std::vector<double> values_;
  ConstraintSet constraint_;
};

/// Scale-aware feasibility tolerance 1e-8 (1 + |v|_inf).
double feasibility_tolerance(std::span<const double> v);

struct ProjectionOptions {
  double tol = 1e-10;  // stop when a sweep moves no entry by more than this
  std::size_t max_sweeps = 500000;
  /// Over-relaxation factor in (0, 2); 1 is plain Dykstra.
  double relaxation = 1.0;
};

struct ProjectionResult {
  std::vector<double> values;
  std::size_t sweeps = 0;
  double last_change = 0.0;
  double max_violation = 0.0;
};

/// Euclidean projection onto the constraint set by Dykstra's algorithm.
///
/// For half-spaces {a.v >= c} the Dykstra correction of each set is a
/// multiple -mu a of its normal, so the state is one scalar mu >= 0 per
/// constraint. Pinned nodes are eliminated (projection onto the slice).
/// The multipliers persist between calls, so a projector can warm-start
/// projections of nearby points.
class ConvexProjector {
 public:
  ConvexProjector(const GridDomain& domain, const ConstraintSet& constraint,
                  ProjectionOptions options = {});

  /// Throws MaxSweepsExceeded (with the final violation) when the sweep
  /// budget runs out.
  ProjectionResult project(std::span<const double> v, bool warm_start = false);
  /// Starts from the given multipliers (one per compiled row).
  ProjectionResult project(std::span<const double> v, std::span<const double> multipliers);
  void reset();
  std::size_t constraint_count() const { return rows_.size(); }
  /// Multiplier of each compiled half-space after the last projection.
  const std::vector<double>& multipliers() const { return mu_; }

  /// Compiled rows as A u >= rhs. Columns of pinned nodes are empty; their
  /// values are folded into rhs.
  Eigen::SparseMatrix<double> constraint_matrix() const;
  std::vector<double> constraint_rhs() const;
  const std::vector<std::size_t>& pinned_nodes() const { return pinned_; }
  const std::vector<double>& pinned_values() const { return pinned_values_; }
  std::size_t size() const { return n_; }

 private:
  struct Row {
    std::array<std::size_t, 3> idx{};
    std::array<double, 3> coef{};
    int len = 0;
    double rhs = 0.0;
    double inv_norm2 = 0.0;
  };

  ProjectionResult run(std::vector<double> v, std::span<const double> v0);

  std::size_t n_ = 0;
  std::vector<Row> rows_;
  std::vector<double> mu_;
  std::vector<std::size_t> pinned_;
  std::vector<double> pinned_values_;
  ProjectionOptions options_;
};

ConvexGrid project_convex(std::span<const double> v, const GridDomain& domain,
                          const ConstraintSet& constraint, ProjectionOptions options = {});

struct FeasibilityReport {
  bool feasible = true;
  double worst = 0.0;         // most negative residual (0 when feasible everywhere)
  double worst_scaled = 0.0;  // convexity residuals divided by |d|^2 h^2
  std::size_t node = 0;
  std::string family = "none";  // convexity | lower_bound | pinned
};

/// Checks both constraint families; tol < 0 selects feasibility_tolerance.
FeasibilityReport is_feasible(const ConvexGrid& u, double tol = -1.0);

/// Centered differences in the interior, second-order one-sided differences
/// at the boundary. Row k is the gradient at node k.
Mat gradient_field(const ConvexGrid& u);
Mat gradient_field(const GridDomain& domain, std::span<const double> values);

/// Sparse difference operators, one per axis, matching gradient_field.
std::vector<Eigen::SparseMatrix<double>> gradient_operators(const GridDomain& domain);

/// b-affine function x -> b(x, y) + a.
struct BAffine {
  Vec y;
  double a = 0.0;
  double operator()(const PreferenceFunction& b, const Vec& x) const { return b.value(x, y) + a; }
};

struct SupResult {
  ConvexGrid grid;
  std::vector<std::size_t> modified;  // nodes where p > u
};

SupResult sup_b_affine(const ConvexGrid& u, const BAffine& p, const PreferenceFunction& b);

}  // namespace screener

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "screener/convexgrid.hpp"
#include "screener/errors.hpp"
#include "screener/model.hpp"
#include "screener/preference.hpp"

namespace screener {

enum class SolverMethod { admm, projected_gradient };
enum class StepRule { fixed, diminishing, backtracking };

const char* to_string(SolverMethod method);
const char* to_string(StepRule rule);

struct SolverConfig {
  SolverMethod method = SolverMethod::admm;
  std::size_t max_iterations = 20000;
  StepRule step_rule = StepRule::backtracking;  // projected_gradient only
  double step_size = 0.0;          // fixed step, diminishing constant, or first trial; 0 = auto
  double armijo = 1e-4;
  double energy_tol = 0.0;         // relative energy change between checks; 0 disables
  double stationarity_tol = 1e-9;  // |u - P_C(u - grad E(u))|_inf
  double rho = 0.0;                // ADMM penalty; 0 = auto
  std::size_t check_every = 10;
  double init_quadratic = 1e-3;
  double init_noise = 0.0;         // amplitude of seeded uniform noise added before projecting
  std::uint64_t seed = 1;
  ProjectionOptions projection{1e-10, 200000, 1.0};

  void validate() const;
};

struct SolveReport {
  SolverMethod method = SolverMethod::admm;
  std::string status = "incomplete";  // converged | incomplete
  std::size_t iterations = 0;
  std::vector<double> energy_trace;   // energies of feasible iterates, in order
  double energy = 0.0;
  double feasibility = 0.0;           // worst constraint residual of the returned iterate
  double stationarity = 0.0;
  double wall_seconds = 0.0;
  bool convex_objective = false;
  bool h1_smoke_pass = true;          // bilinear b only; otherwise not checked
  double rho = 0.0;
};

struct SolveResult {
  ConvexGrid solution;
  SolveReport report;
};

/// Raised when the iteration budget runs out; carries the best feasible iterate.
class MaxIterations : public Error {
 public:
  MaxIterations(const std::string& what, std::shared_ptr<const SolveResult> best)
      : Error(what), best_(std::move(best)) {}
  const SolveResult& best() const { return *best_; }

 private:
  std::shared_ptr<const SolveResult> best_;
};

/// Minimizes the discrete energy over the constraint set.
///
/// admm splits the constraint rows: s = A u with s >= c, so the s-update is
/// a clamp and the u-update is a damped Newton solve of the energy plus the
/// augmented term. Feasible iterates come from projecting u (warm Dykstra).
/// projected_gradient uses u <- P_C(u - t grad E) with the configured step rule.
SolveResult solve(const Functional& model, const PreferenceFunction& b, const GridDomain& domain,
                  const ConstraintSet& constraint, const SolverConfig& config);

/// Initial iterate: lower bound (or pinned value) plus a small convex quadratic,
/// projected onto the constraint set.
std::vector<double> initial_iterate(const GridDomain& domain, const ConstraintSet& constraint,
                                    const SolverConfig& config);

/// |u - P_C(u - g)|_inf.
double stationarity(ConvexProjector& projector, std::span<const double> u, const Vec& grad,
                    std::span<const double> multipliers = {});

struct ELResidual {
  std::vector<double> field;  // interior nodes 1 .. N-2
  double sup = 0.0;
};

/// (|u'|^(q-2) u')' - 1 with fluxes at half nodes.
ELResidual el_residual_1d(std::span<const double> u, double q, double spacing);

}  // namespace screener

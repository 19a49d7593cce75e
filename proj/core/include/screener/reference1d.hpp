#pragma once

#include "screener/convexgrid.hpp"
#include "screener/model.hpp"
#include "screener/preference.hpp"

// The one-dimensional problem: minimize the integral of |u'|^q / q + u over
// [-1, 1] with u(-1) = u(1) = 0. Its minimizer is convex and has a closed form.

namespace screener {

/// (q-1)/q (|x|^(q/(q-1)) - 1)
double exact_solution(double q, double x);
/// sign(x) |x|^(1/(q-1))
double exact_derivative(double q, double x);
/// -2 (q-1)^2 / (q (2q-1))
double exact_energy(double q);

/// Grid, model and preference of the reference problem at N nodes.
struct ReferenceProblem {
  double q = 3.0;
  GridDomain domain;
  Functional model;
  PreferencePtr preference;
  ConstraintSet constraint;
};

ReferenceProblem reference_problem(double q, int nodes);

/// Exact solution sampled at the nodes of a [-1, 1] grid.
std::vector<double> exact_samples(double q, const GridDomain& domain);

struct ReferenceComparison {
  double q = 3.0;
  double linf_error = 0.0;
  double energy = 0.0;
  double exact_energy = 0.0;
  double energy_gap = 0.0;  // energy - exact_energy
  double el_residual_sup = 0.0;
};

/// Requires a 1-d grid on [-1, 1] in pinned mode (ContractViolation otherwise).
ReferenceComparison compare(const ConvexGrid& u, double q);

}  // namespace screener

#include "screener/reference1d.hpp"

#include <cmath>

#include "screener/errors.hpp"
#include "screener/solver.hpp"

namespace screener {

namespace {

void require_q(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("q must exceed 1");
}

}  // namespace

double exact_solution(double q, double x) {
  require_q(q);
  return (q - 1.0) / q * (std::pow(std::abs(x), q / (q - 1.0)) - 1.0);
}

double exact_derivative(double q, double x) {
  require_q(q);
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), 1.0 / (q - 1.0)), x);
}

double exact_energy(double q) {
  require_q(q);
  return -2.0 * (q - 1.0) * (q - 1.0) / (q * (2.0 * q - 1.0));
}

ReferenceProblem reference_problem(double q, int nodes) {
  require_q(q);
  ReferenceProblem p;
  p.q = q;
  p.domain = GridDomain::line(-1.0, 1.0, nodes);
  Box x = p.domain.box();
  p.model = power_source(q, ScalarProfile::constant(1.0), x);
  p.model.name = "reference_1d";
  // Gradients of the solution stay in [-1, 1]; Y leaves room for iterates.
  p.preference = make_bilinear(x, Box::cube(1, -10.0, 10.0));
  p.constraint = ConstraintSet::pinned(p.domain, 0.0);
  return p;
}

std::vector<double> exact_samples(double q, const GridDomain& domain) {
  std::vector<double> v(domain.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = exact_solution(q, domain.point(k)[0]);
  return v;
}

ReferenceComparison compare(const ConvexGrid& u, double q) {
  require_q(q);
  const GridDomain& d = u.domain();
  if (d.dim != 1 || d.lower[0] != -1.0 || d.upper[0] != 1.0)
    throw ContractViolation("reference comparison needs a 1-d grid on [-1, 1]");
  if (u.constraint().mode != BoundaryMode::pinned)
    throw ContractViolation("reference comparison needs the pinned boundary mode");

  ReferenceProblem ref = reference_problem(q, d.nodes[0]);
  ReferenceComparison out;
  out.q = q;
  for (std::size_t k = 0; k < d.size(); ++k) {
    double e = std::abs(u[k] - exact_solution(q, d.point(k)[0]));
    out.linf_error = std::max(out.linf_error, e);
  }
  out.energy = evaluate_energy(ref.model, *ref.preference, u);
  out.exact_energy = exact_energy(q);
  out.energy_gap = out.energy - out.exact_energy;
  out.el_residual_sup = el_residual_1d(u.values(), q, d.spacing(0)).sup;
  return out;
}

}  // namespace screener

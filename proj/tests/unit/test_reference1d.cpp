#include <doctest.h>

#include <cmath>

#include "screener/errors.hpp"
#include "screener/reference1d.hpp"
#include "screener/solver.hpp"

using namespace screener;

TEST_CASE("exact solution values") {
  for (double q : {1.5, 2.0, 3.0, 4.0}) {
    CHECK(exact_solution(q, 1.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(exact_solution(q, -1.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(exact_solution(q, 0.0) == doctest::Approx(-(q - 1.0) / q));
    CHECK(exact_solution(q, 0.3) == doctest::Approx(exact_solution(q, -0.3)));
  }
  CHECK(exact_solution(3.0, 0.0) == doctest::Approx(-2.0 / 3.0));
  CHECK(exact_solution(2.0, 0.5) == doctest::Approx(-3.0 / 8.0));
  CHECK(exact_derivative(3.0, 0.25) == doctest::Approx(0.5));
  CHECK(exact_derivative(3.0, -0.25) == doctest::Approx(-0.5));
  CHECK(exact_derivative(2.0, 0.7) == doctest::Approx(0.7));
}

TEST_CASE("exact solution satisfies the Euler-Lagrange equation") {
  // flux |u'|^(q-2) u' equals x, so its derivative is 1
  for (double q : {2.0, 2.5, 3.0, 4.0}) {
    for (double x : {-0.8, -0.2, 0.1, 0.6}) {
      double du = exact_derivative(q, x);
      CHECK(std::pow(std::abs(du), q - 2.0) * du == doctest::Approx(x));
      const double h = 1e-6;
      CHECK((exact_solution(q, x + h) - exact_solution(q, x - h)) / (2 * h) ==
            doctest::Approx(du).epsilon(1e-6));
    }
  }
}

TEST_CASE("exact energy") {
  CHECK(exact_energy(2.0) == doctest::Approx(-1.0 / 3.0));
  CHECK(exact_energy(3.0) == doctest::Approx(-8.0 / 15.0));
  // midpoint quadrature of |u'|^q / q + u on [-1, 1]
  for (double q : {2.0, 3.0, 4.0}) {
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = -1.0 + (i + 0.5) * 2.0 / n;
      s += (std::pow(std::abs(exact_derivative(q, x)), q) / q + exact_solution(q, x)) * 2.0 / n;
    }
    CHECK(exact_energy(q) == doctest::Approx(s).epsilon(1e-7));
  }
}

TEST_CASE("reference problem setup") {
  auto ref = reference_problem(3.0, 101);
  CHECK(ref.domain.dim == 1);
  CHECK(ref.domain.lower[0] == -1.0);
  CHECK(ref.domain.upper[0] == 1.0);
  CHECK(ref.constraint.mode == BoundaryMode::pinned);
  auto s = exact_samples(3.0, ref.domain);
  CHECK(s.size() == 101);
  CHECK(s[50] == doctest::Approx(-2.0 / 3.0));
  CHECK_THROWS_AS(reference_problem(1.0, 101), InvalidArgument);
}

TEST_CASE("compare") {
  auto ref = reference_problem(3.0, 201);
  auto sol = solve(ref.model, *ref.preference, ref.domain, ref.constraint, SolverConfig{});
  auto c = compare(sol.solution, 3.0);
  CHECK(c.linf_error <= 5e-3);
  CHECK(c.exact_energy == doctest::Approx(-8.0 / 15.0));
  CHECK(c.energy_gap == doctest::Approx(c.energy - c.exact_energy));
  CHECK(std::abs(c.energy_gap) <= 1e-3);

  auto exact = compare(ConvexGrid(ref.domain, exact_samples(3.0, ref.domain), ref.constraint), 3.0);
  CHECK(exact.linf_error == 0.0);

  auto shifted = GridDomain::line(0.0, 1.0, 21);
  CHECK_THROWS_AS(compare(ConvexGrid(shifted, std::vector<double>(21, 0.0), ConstraintSet::pinned(shifted)), 3.0),
                  ContractViolation);
  CHECK_THROWS_AS(compare(ConvexGrid(ref.domain, sol.solution.values(), ConstraintSet::convex_only(ref.domain)), 3.0),
                  ContractViolation);
}

#include <doctest.h>

#include <cmath>

#include "screener/convexgrid.hpp"
#include "screener/errors.hpp"
#include "screener/parallel.hpp"

using namespace screener;

namespace {

std::vector<double> random_values(std::uint64_t seed, std::size_t n) {
  auto rng = stream_rng(seed, 0);
  std::vector<double> v(n);
  for (auto& e : v) e = uniform(rng, -1.0, 1.0);
  return v;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// brute-force discrete convexity: every stencil second difference is >= -tol
bool convex_by_stencil(const GridDomain& d, std::span<const double> v, double tol) {
  for (const auto& s : default_stencil(d.dim)) {
    for (std::size_t k = 0; k < d.size(); ++k) {
      auto m = d.multi_index(k);
      int i0 = m[0] - s[0], j0 = m[1] - s[1], i1 = m[0] + s[0], j1 = m[1] + s[1];
      int n1 = d.dim == 2 ? d.nodes[1] : 1;
      if (i0 < 0 || i1 >= d.nodes[0] || j0 < 0 || j1 >= n1 || j0 >= n1 || j1 < 0) continue;
      if (v[d.index(i0, j0)] - 2.0 * v[k] + v[d.index(i1, j1)] < -tol) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("GridDomain basics") {
  auto d = GridDomain::rectangle(0.0, 1.0, 5, -1.0, 1.0, 3);
  CHECK(d.size() == 15);
  CHECK(d.index(2, 1) == 7);
  CHECK(d.multi_index(7) == std::array<int, 2>{2, 1});
  CHECK(d.spacing(0) == doctest::Approx(0.25));
  CHECK(d.point(7)[0] == doctest::Approx(0.5));
  CHECK(d.point(7)[1] == doctest::Approx(0.0));
  CHECK(d.on_boundary(0));
  CHECK_FALSE(d.on_boundary(7));
  double total = 0.0;
  for (double w : d.weights()) total += w;
  CHECK(total == doctest::Approx(2.0));
  CHECK_THROWS_AS(GridDomain::line(0.0, 1.0, 2).validate(), InvalidArgument);
  CHECK_THROWS_AS(GridDomain::line(1.0, 0.0, 5).validate(), InvalidArgument);
  GridDomain bad;
  bad.dim = 3;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("projection hand case") {
  auto d = GridDomain::line(0.0, 1.0, 3);
  std::vector<double> v{0.0, 1.0, 0.0};
  auto p = project_convex(v, d, ConstraintSet::convex_only(d));
  for (double e : p.values()) CHECK(e == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("projection is feasible, idempotent and non-expansive") {
  for (int dim : {1, 2}) {
    auto d = dim == 1 ? GridDomain::line(-1.0, 1.0, 25) : GridDomain::rectangle(0.0, 1.0, 9, 0.0, 1.0, 8);
    auto c = ConstraintSet::convex_only(d);
    ConvexProjector proj(d, c);
    for (std::uint64_t s = 0; s < 20; ++s) {
      auto v = random_values(100 + s, d.size());
      auto w = random_values(200 + s, d.size());
      auto pv = proj.project(v).values;
      auto pw = proj.project(w).values;
      CHECK(convex_by_stencil(d, pv, 1e-8));
      CHECK(is_feasible(ConvexGrid(d, pv, c)).feasible);
      auto ppv = proj.project(pv).values;
      CHECK(distance(ppv, pv) <= 1e-8);
      CHECK(distance(pv, pw) <= distance(v, w) + 1e-8);
      // variational inequality: (v - Pv).(z - Pv) <= 0 for feasible z
      double vi = 0.0;
      for (std::size_t k = 0; k < d.size(); ++k) vi += (v[k] - pv[k]) * (pw[k] - pv[k]);
      CHECK(vi <= 1e-7);
    }
  }
}

TEST_CASE("projection with participation and pinned constraints") {
  auto d = GridDomain::line(1.0, 2.0, 11);
  auto b = make_bilinear(d.box(), Box::cube(1, -5.0, 5.0));
  auto part = ConstraintSet::participation(d, *b, 0.2, Vec::Constant(1, 1.0));
  auto p = project_convex(random_values(7, d.size()), d, part);
  for (std::size_t k = 0; k < d.size(); ++k) CHECK(p[k] >= 0.2 + d.point(k)[0] - 1e-8);
  CHECK(is_feasible(p).feasible);

  auto pin = ConstraintSet::pinned(d, 0.5);
  auto q = project_convex(random_values(8, d.size()), d, pin);
  CHECK(q[0] == 0.5);
  CHECK(q[d.size() - 1] == 0.5);
  CHECK(is_feasible(q).feasible);
}

TEST_CASE("projection of an already convex function is the identity") {
  auto d = GridDomain::rectangle(-1.0, 1.0, 7, -1.0, 1.0, 7);
  std::vector<double> v;
  for (std::size_t k = 0; k < d.size(); ++k) v.push_back(d.point(k).squaredNorm());
  auto p = project_convex(v, d, ConstraintSet::convex_only(d));
  CHECK(distance(p.values(), v) <= 1e-12);
}

TEST_CASE("is_feasible") {
  auto d = GridDomain::line(0.0, 1.0, 5);
  auto c = ConstraintSet::convex_only(d);
  CHECK(is_feasible(ConvexGrid(d, {0.0, 0.1, 0.3, 0.6, 1.0}, c)).feasible);
  auto bad = is_feasible(ConvexGrid(d, {0.0, 0.5, 0.3, 0.6, 1.0}, c));
  CHECK_FALSE(bad.feasible);
  CHECK(bad.family == "convexity");
  CHECK(bad.worst == doctest::Approx(-0.7));
  CHECK(bad.node == 1);

  auto b = make_bilinear(d.box(), Box::cube(1, -5.0, 5.0));
  auto part = ConstraintSet::participation(d, *b, 0.0, Vec::Constant(1, 0.0));
  auto low = is_feasible(ConvexGrid(d, {0.0, -0.05, -0.1, -0.05, 0.0}, part));
  CHECK_FALSE(low.feasible);
  CHECK(low.family == "lower_bound");

  auto pin = ConstraintSet::pinned(d, 0.0);
  auto moved = is_feasible(ConvexGrid(d, {0.1, 0.0, 0.0, 0.0, 0.0}, pin));
  CHECK_FALSE(moved.feasible);
  CHECK(moved.family == "pinned");
}

TEST_CASE("gradient_field is exact on quadratics") {
  auto d = GridDomain::rectangle(0.0, 1.0, 6, -1.0, 2.0, 7);
  std::vector<double> aff, quad;
  for (std::size_t k = 0; k < d.size(); ++k) {
    Vec x = d.point(k);
    aff.push_back(2.0 * x[0] - 3.0 * x[1] + 1.0);
    quad.push_back(x[0] * x[0] + x[0] * x[1] - 0.5 * x[1] * x[1]);
  }
  Mat ga = gradient_field(d, aff), gq = gradient_field(d, quad);
  for (std::size_t k = 0; k < d.size(); ++k) {
    Vec x = d.point(k);
    auto r = static_cast<Eigen::Index>(k);
    CHECK(ga(r, 0) == doctest::Approx(2.0));
    CHECK(ga(r, 1) == doctest::Approx(-3.0));
    CHECK(gq(r, 0) == doctest::Approx(2.0 * x[0] + x[1]));
    CHECK(gq(r, 1) == doctest::Approx(x[0] - x[1]));
  }
  auto ops = gradient_operators(d);
  REQUIRE(ops.size() == 2);
  Eigen::Map<const Vec> qv(quad.data(), static_cast<Eigen::Index>(quad.size()));
  CHECK(((ops[0] * qv) - gq.col(0)).norm() <= 1e-12);
  CHECK(((ops[1] * qv) - gq.col(1)).norm() <= 1e-12);
}

TEST_CASE("sup_b_affine") {
  auto d = GridDomain::line(-1.0, 1.0, 21);
  auto b = make_bilinear(d.box(), Box::cube(1, -5.0, 5.0));
  std::vector<double> v;
  for (std::size_t k = 0; k < d.size(); ++k) v.push_back(d.point(k)[0] * d.point(k)[0]);
  ConvexGrid u(d, v, ConstraintSet::convex_only(d));

  // max(x^2, 1/4) raises exactly the interior of (-1/2, 1/2)
  auto r = sup_b_affine(u, BAffine{Vec::Zero(1), 0.25}, *b);
  CHECK(r.modified.size() == 9);
  for (std::size_t k : r.modified) CHECK(std::abs(d.point(k)[0]) < 0.5);
  for (std::size_t k = 0; k < d.size(); ++k) CHECK(r.grid[k] == doctest::Approx(std::max(v[k], 0.25)));
  CHECK(is_feasible(r.grid).feasible);

  auto none = sup_b_affine(u, BAffine{Vec::Zero(1), -1.0}, *b);
  CHECK(none.modified.empty());
  CHECK(none.grid.values() == v);
}

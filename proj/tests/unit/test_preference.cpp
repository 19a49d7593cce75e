#include <doctest.h>

#include <cmath>

#include "screener/errors.hpp"
#include "screener/parallel.hpp"
#include "screener/preference.hpp"

using namespace screener;

namespace {

Vec random_in(std::mt19937_64& rng, const Box& box) {
  Vec v(box.dim());
  for (int i = 0; i < box.dim(); ++i) v[i] = uniform(rng, box.lower[i], box.upper[i]);
  return v;
}

std::vector<Vec> line_points(double lo, double hi, int n) {
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) pts.push_back(Vec::Constant(1, lo + (hi - lo) * i / (n - 1)));
  return pts;
}

std::vector<Vec> square_points(double lo, double hi, int n) {
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vec p(2);
      p << lo + (hi - lo) * i / (n - 1), lo + (hi - lo) * j / (n - 1);
      pts.push_back(p);
    }
  }
  return pts;
}

const Box kX2 = Box::cube(2, -1.0, 1.0);
const Box kY2 = Box::cube(2, -20.0, 20.0);

}  // namespace

TEST_CASE("derivatives agree with central differences") {
  Vec a(2);
  a << 0.3, -0.4;
  std::vector<PreferencePtr> family{
      make_bilinear(kX2, kY2),
      make_separable_concave(kX2, kY2, ConvexPotential::hyperbolic(0.7), ConvexPotential::quadratic(0.4)),
      make_rank_one_perturbed(kX2, kY2, ConvexPotential::hyperbolic(0.5), a),
      make_custom("quartic_perturbed", kX2, kY2, {{"eps", 0.2}})};
  auto rng = stream_rng(2, 0);
  const double h = 1e-5;
  for (const auto& b : family) {
    for (int k = 0; k < 50; ++k) {
      Vec x = random_in(rng, kX2), y = random_in(rng, Box::cube(2, -2.0, 2.0));
      Vec gx = b->grad_x(x, y), gy = b->grad_y(x, y);
      Mat cross = b->cross_hessian(x, y);
      for (int i = 0; i < 2; ++i) {
        Vec e = Vec::Unit(2, i) * h;
        CHECK(gx[i] == doctest::Approx((b->value(x + e, y) - b->value(x - e, y)) / (2 * h)).epsilon(1e-6));
        CHECK(gy[i] == doctest::Approx((b->value(x, y + e) - b->value(x, y - e)) / (2 * h)).epsilon(1e-6));
        Vec col = (b->grad_x(x, y + e) - b->grad_x(x, y - e)) / (2 * h);
        for (int r = 0; r < 2; ++r) CHECK(cross(r, i) == doctest::Approx(col[r]).epsilon(1e-6));
      }
    }
  }
  CHECK(make_bilinear(kX2, kY2)->cross_hessian(Vec::Ones(2), Vec::Zero(2)).isIdentity());
}

TEST_CASE("b_exponential matches the closed forms") {
  auto rng = stream_rng(4, 0);
  Vec a(2);
  a << 0.5, 0.25;
  auto bil = make_bilinear(kX2, kY2);
  auto sep = make_separable_concave(kX2, kY2, ConvexPotential::hyperbolic(0.8), ConvexPotential::zero());
  auto rank = make_rank_one_perturbed(kX2, kY2, ConvexPotential::hyperbolic(0.6), a);
  for (int k = 0; k < 1000; ++k) {
    Vec x = random_in(rng, kX2), p = random_in(rng, Box::cube(2, -3.0, 3.0));
    CHECK((b_exponential(*bil, x, p) - p).norm() == 0.0);

    Vec dF = 0.8 * x / std::sqrt(1.0 + x.squaredNorm());
    CHECK((b_exponential(*sep, x, p) - (p + dF)).norm() <= 1e-8);

    Vec dG = 0.6 * x / std::sqrt(1.0 + x.squaredNorm());
    Mat m = Mat::Identity(2, 2) + dG * a.transpose();
    Vec expect = m.partialPivLu().solve(p);
    Vec y = b_exponential(*rank, x, p);
    CHECK((y - expect).norm() <= 1e-8);
    CHECK((rank->grad_x(x, y) - p).norm() <= 1e-10);
  }
}

TEST_CASE("b_exponential errors") {
  auto deg = make_custom("degenerate_twist", kX2, kY2);
  CHECK_THROWS_AS(b_exponential(*deg, Vec::Zero(2), Vec::Ones(2)), SingularTwist);
  auto tight = make_bilinear(kX2, Box::cube(2, -1.0, 1.0));
  Vec p = Vec::Constant(2, 5.0);
  CHECK_THROWS_AS(b_exponential(*tight, Vec::Zero(2), p), OutOfRange);
}

TEST_CASE("b_transform small cases") {
  Box x1 = Box::cube(1, -1.0, 1.0), y1 = Box::cube(1, -1.0, 1.0);
  auto b = make_bilinear(x1, y1);
  auto xs = line_points(-1.0, 1.0, 21);
  std::vector<Vec> single{Vec::Constant(1, 0.4)};
  auto one = b_transform(*b, xs, single, std::vector<double>{0.0});
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(one.values[i] == doctest::Approx(0.4 * xs[i][0]));

  auto ys = line_points(-1.0, 1.0, 3);
  auto abs = b_transform(*b, xs, ys, std::vector<double>{0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(abs.values[i] == doctest::Approx(std::abs(xs[i][0])));
  // tie at x = 0 goes to the smallest index
  CHECK(abs.argmax[10] == 0);
}

TEST_CASE("bstar_transform small cases") {
  auto b = make_bilinear(kX2, kY2);
  auto xs = square_points(-1.0, 1.0, 5);
  auto ys = square_points(-2.0, 2.0, 5);
  Vec y0 = ys[7];
  std::vector<double> u;
  for (const auto& x : xs) u.push_back(x.dot(y0));
  auto t = bstar_transform(*b, xs, ys, u);
  for (std::size_t j = 0; j < ys.size(); ++j) {
    double best = -1e300;
    for (const auto& x : xs) best = std::max(best, x.dot(ys[j] - y0));
    CHECK(t.values[j] == doctest::Approx(best));
  }
  CHECK(t.values[7] == doctest::Approx(0.0));

  std::vector<double> zero(xs.size(), 0.0);
  auto z = bstar_transform(*b, xs, ys, zero);
  for (std::size_t j = 0; j < ys.size(); ++j) {
    double best = -1e300;
    for (const auto& x : xs) best = std::max(best, b->value(x, ys[j]));
    CHECK(z.values[j] == doctest::Approx(best));
  }
}

TEST_CASE("transforms match exhaustive maximization on random data") {
  auto b = make_custom("quartic_perturbed", kX2, kY2, {{"eps", 0.1}});
  auto xs = square_points(-1.0, 1.0, 4);
  auto ys = square_points(-1.5, 1.5, 5);
  auto rng = stream_rng(8, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> u(xs.size()), v(ys.size());
    for (auto& e : u) e = uniform(rng, -1.0, 1.0);
    for (auto& e : v) e = uniform(rng, -1.0, 1.0);
    auto tb = b_transform(*b, xs, ys, v);
    auto ts = bstar_transform(*b, xs, ys, u);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double best = -1e300;
      for (std::size_t j = 0; j < ys.size(); ++j) best = std::max(best, b->value(xs[i], ys[j]) - v[j]);
      CHECK(tb.values[i] == doctest::Approx(best));
    }
    for (std::size_t j = 0; j < ys.size(); ++j) {
      double best = -1e300;
      for (std::size_t i = 0; i < xs.size(); ++i) best = std::max(best, b->value(xs[i], ys[j]) - u[i]);
      CHECK(ts.values[j] == doctest::Approx(best));
    }
  }
}

TEST_CASE("double transform is an idempotent envelope below u") {
  auto b = make_separable_concave(kX2, kY2, ConvexPotential::quadratic(0.3), ConvexPotential::zero());
  auto xs = square_points(-1.0, 1.0, 6);
  auto ys = square_points(-2.0, 2.0, 7);
  for (int trial = 0; trial < 100; ++trial) {
    auto rng = stream_rng(21, static_cast<std::uint64_t>(trial));
    std::vector<double> u(xs.size());
    for (auto& e : u) e = uniform(rng, -1.0, 1.0);
    auto once = double_transform(*b, xs, ys, u);
    auto twice = double_transform(*b, xs, ys, once);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      CHECK(once[i] <= u[i] + 1e-12);
      CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("is_b_convex") {
  Box x1 = Box::cube(1, -1.0, 1.0), y1 = Box::cube(1, -3.0, 3.0);
  auto b = make_bilinear(x1, y1);
  auto xs = line_points(-1.0, 1.0, 21);
  auto ys = line_points(-3.0, 3.0, 61);

  std::vector<double> affine;
  for (const auto& x : xs) affine.push_back(b->value(x, ys[40]) + 0.25);
  CHECK(is_b_convex(*b, xs, ys, affine, 1e-9).b_convex);

  std::vector<double> dented;
  for (const auto& x : xs) dented.push_back(x[0] * x[0]);
  dented[10] -= 0.2;
  auto r = is_b_convex(*b, xs, ys, dented, 1e-9);
  CHECK_FALSE(r.b_convex);
  CHECK(r.max_deviation > 0.05);

  auto rng = stream_rng(3, 0);
  std::vector<double> v(ys.size());
  for (auto& e : v) e = uniform(rng, 0.0, 2.0);
  auto env = b_transform(*b, xs, ys, v).values;
  CHECK(is_b_convex(*b, xs, ys, env, 1e-9).b_convex);
}

TEST_CASE("check_twist") {
  SampleSpec s;
  s.count = 500;
  CHECK(check_twist(*make_bilinear(kX2, kY2), s).pass);
  CHECK(check_twist(*make_bilinear(kX2, kY2), s).min_abs_det == doctest::Approx(1.0));
  Vec a(2);
  a << 0.6, 0.5;
  CHECK(check_twist(*make_rank_one_perturbed(kX2, kY2, ConvexPotential::hyperbolic(0.9), a), s).pass);
  auto deg = check_twist(*make_custom("degenerate_twist", kX2, kY2), s);
  CHECK_FALSE(deg.pass);
  CHECK(deg.min_abs_det == doctest::Approx(0.0));
}

TEST_CASE("check_cross_curvature") {
  SampleSpec s;
  s.count = 300;
  auto bil = check_cross_curvature(*make_bilinear(kX2, kY2), s);
  CHECK(bil.pass);
  CHECK(std::abs(bil.min_value) <= 1e-8);
  auto sep = check_cross_curvature(
      *make_separable_concave(kX2, kY2, ConvexPotential::hyperbolic(0.5), ConvexPotential::quadratic(0.5)), s);
  CHECK(sep.pass);
  auto quartic = check_cross_curvature(
      *make_custom("quartic_perturbed", kX2, Box::cube(2, -0.25, 0.25), {{"eps", 0.2}}), s);
  CHECK_FALSE(quartic.pass);
  CHECK(quartic.witness_x.size() == 2);
}

TEST_CASE("normalize_coordinates") {
  auto xs = square_points(-1.0, 1.0, 9);
  auto ys = square_points(-2.0, 2.0, 5);
  std::vector<double> u;
  for (const auto& x : xs) u.push_back(x.squaredNorm());
  const std::size_t base = 40;  // (0, 0)
  Vec y0 = 2.0 * xs[base];

  auto chart = normalize_coordinates(*make_bilinear(kX2, kY2), xs, u, base, y0, ys);
  CHECK(chart.u_tilde[base] == 0.0);
  CHECK(chart.max_abs_residual == 0.0);
  for (double v : chart.u_tilde) CHECK(v >= -1e-12);

  auto sep = make_separable_concave(kX2, kY2, ConvexPotential::quadratic(0.5), ConvexPotential::quadratic(0.3));
  std::vector<double> us;
  for (const auto& x : xs) us.push_back(x.squaredNorm() - sep->value(x, Vec::Zero(2)));
  Vec ys0 = b_exponential(*sep, xs[base], Vec::Zero(2));
  auto c2 = normalize_coordinates(*sep, xs, us, base, ys0, ys);
  CHECK(c2.u_tilde[base] == 0.0);
  CHECK(c2.max_abs_residual <= 1e-12);

  auto deg = make_custom("degenerate_twist", kX2, kY2);
  CHECK_THROWS_AS(normalize_coordinates(*deg, xs, u, base, y0, ys), SingularTwist);
}

TEST_CASE("preference registry") {
  PreferenceSpec spec;
  spec.kind = "custom";
  spec.name = "no_such_entry";
  CHECK_THROWS_AS(make_preference(spec, kX2, kY2), InvalidArgument);
  spec.name = "quartic_perturbed";
  CHECK(make_preference(spec, kX2, kY2)->kind() == PreferenceKind::custom);
  spec.kind = "rank_one_perturbed";
  CHECK_THROWS_AS(make_preference(spec, kX2, kY2), InvalidArgument);
  spec.a = {0.1, 0.2};
  CHECK(make_preference(spec, kX2, kY2)->kind() == PreferenceKind::rank_one_perturbed);
}

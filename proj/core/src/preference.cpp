#include "screener/preference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "screener/errors.hpp"
#include "screener/parallel.hpp"

namespace screener {

// ---------------------------------------------------------------------------
// Box / potentials

bool Box::contains(const Vec& p, double tol) const {
  if (p.size() != lower.size()) return false;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] < lower[i] - tol || p[i] > upper[i] + tol) return false;
  }
  return true;
}

Vec Box::clamp(const Vec& p) const { return p.cwiseMax(lower).cwiseMin(upper); }

Box Box::cube(int dim, double lo, double hi) {
  return Box{Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
}

ConvexPotential ConvexPotential::quadratic(double k) {
  return ConvexPotential{
      "quadratic",
      [k](const Vec& x) { return 0.5 * k * x.squaredNorm(); },
      [k](const Vec& x) -> Vec { return k * x; },
      [k](const Vec& x) -> Mat { return k * Mat::Identity(x.size(), x.size()); },
  };
}

ConvexPotential ConvexPotential::hyperbolic(double k) {
  return ConvexPotential{
      "hyperbolic",
      [k](const Vec& x) { return k * std::sqrt(1.0 + x.squaredNorm()); },
      [k](const Vec& x) -> Vec { return k * x / std::sqrt(1.0 + x.squaredNorm()); },
      [k](const Vec& x) -> Mat {
        double r = std::sqrt(1.0 + x.squaredNorm());
        Mat h = Mat::Identity(x.size(), x.size()) / r;
        h -= x * x.transpose() / (r * r * r);
        return k * h;
      },
  };
}

ConvexPotential ConvexPotential::zero() {
  return ConvexPotential{
      "zero",
      [](const Vec&) { return 0.0; },
      [](const Vec& x) -> Vec { return Vec::Zero(x.size()); },
      [](const Vec& x) -> Mat { return Mat::Zero(x.size(), x.size()); },
  };
}

const char* to_string(PreferenceKind kind) {
  switch (kind) {
    case PreferenceKind::bilinear: return "bilinear";
    case PreferenceKind::separable_concave: return "separable_concave";
    case PreferenceKind::rank_one_perturbed: return "rank_one_perturbed";
    case PreferenceKind::custom: return "custom";
  }
  return "unknown";
}

PreferenceFunction::PreferenceFunction(PreferenceKind kind, std::string name, Box x_domain,
                                       Box y_domain)
    : kind_(kind), name_(std::move(name)), x_domain_(std::move(x_domain)),
      y_domain_(std::move(y_domain)) {
  if (x_domain_.dim() != y_domain_.dim())
    throw InvalidArgument("X and Y must have the same dimension");
  if (x_domain_.dim() < 1) throw InvalidArgument("domains must have dimension >= 1");
}

std::optional<Vec> PreferenceFunction::exponential_closed_form(const Vec&, const Vec&) const {
  return std::nullopt;
}

std::optional<double> PreferenceFunction::convexifying_potential(const Vec&) const {
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Families

namespace {

class Bilinear final : public PreferenceFunction {
 public:
  Bilinear(Box x, Box y)
      : PreferenceFunction(PreferenceKind::bilinear, "bilinear", std::move(x), std::move(y)) {}
  double value(const Vec& x, const Vec& y) const override { return x.dot(y); }
  Vec grad_x(const Vec&, const Vec& y) const override { return y; }
  Vec grad_y(const Vec& x, const Vec&) const override { return x; }
  Mat cross_hessian(const Vec& x, const Vec&) const override {
    return Mat::Identity(x.size(), x.size());
  }
  std::optional<Vec> exponential_closed_form(const Vec&, const Vec& p) const override {
    return p;
  }
  std::optional<double> convexifying_potential(const Vec&) const override { return 0.0; }
};

class SeparableConcave final : public PreferenceFunction {
 public:
  SeparableConcave(Box x, Box y, ConvexPotential f, ConvexPotential g)
      : PreferenceFunction(PreferenceKind::separable_concave, "separable_concave", std::move(x),
                           std::move(y)),
        f_(std::move(f)), g_(std::move(g)) {}
  double value(const Vec& x, const Vec& y) const override {
    return x.dot(y) - f_.value(x) - g_.value(y);
  }
  Vec grad_x(const Vec& x, const Vec& y) const override { return y - f_.gradient(x); }
  Vec grad_y(const Vec& x, const Vec& y) const override { return x - g_.gradient(y); }
  Mat cross_hessian(const Vec& x, const Vec&) const override {
    return Mat::Identity(x.size(), x.size());
  }
  std::optional<Vec> exponential_closed_form(const Vec& x, const Vec& p) const override {
    return Vec(p + f_.gradient(x));
  }
  std::optional<double> convexifying_potential(const Vec& x) const override {
    return f_.value(x);
  }

 private:
  ConvexPotential f_, g_;
};

class RankOnePerturbed final : public PreferenceFunction {
 public:
  RankOnePerturbed(Box x, Box y, ConvexPotential f, Vec a)
      : PreferenceFunction(PreferenceKind::rank_one_perturbed, "rank_one_perturbed",
                           std::move(x), std::move(y)),
        f_(std::move(f)), a_(std::move(a)) {
    if (a_.size() != dim()) throw InvalidArgument("rank-one direction has wrong dimension");
  }
  double value(const Vec& x, const Vec& y) const override {
    return x.dot(y) + f_.value(x) * a_.dot(y);
  }
  Vec grad_x(const Vec& x, const Vec& y) const override {
    return y + f_.gradient(x) * a_.dot(y);
  }
  Vec grad_y(const Vec& x, const Vec&) const override { return x + f_.value(x) * a_; }
  Mat cross_hessian(const Vec& x, const Vec&) const override {
    return Mat::Identity(x.size(), x.size()) + f_.gradient(x) * a_.transpose();
  }
  std::optional<Vec> exponential_closed_form(const Vec& x, const Vec& p) const override {
    return Vec(cross_hessian(x, p).partialPivLu().solve(p));
  }

 private:
  ConvexPotential f_;
  Vec a_;
};

// b = x.y - eps (x.y)^2
class QuarticPerturbed final : public PreferenceFunction {
 public:
  QuarticPerturbed(Box x, Box y, double eps)
      : PreferenceFunction(PreferenceKind::custom, "quartic_perturbed", std::move(x),
                           std::move(y)),
        eps_(eps) {}
  double value(const Vec& x, const Vec& y) const override {
    double s = x.dot(y);
    return s - eps_ * s * s;
  }
  Vec grad_x(const Vec& x, const Vec& y) const override {
    return (1.0 - 2.0 * eps_ * x.dot(y)) * y;
  }
  Vec grad_y(const Vec& x, const Vec& y) const override {
    return (1.0 - 2.0 * eps_ * x.dot(y)) * x;
  }
  Mat cross_hessian(const Vec& x, const Vec& y) const override {
    Mat m = (1.0 - 2.0 * eps_ * x.dot(y)) * Mat::Identity(x.size(), x.size());
    m -= 2.0 * eps_ * y * x.transpose();
    return m;
  }

 private:
  double eps_;
};

// b = x_1 y_1: the second row and column of D_xy b vanish.
class DegenerateTwist final : public PreferenceFunction {
 public:
  DegenerateTwist(Box x, Box y)
      : PreferenceFunction(PreferenceKind::custom, "degenerate_twist", std::move(x),
                           std::move(y)) {}
  double value(const Vec& x, const Vec& y) const override { return x[0] * y[0]; }
  Vec grad_x(const Vec& x, const Vec& y) const override {
    Vec g = Vec::Zero(x.size());
    g[0] = y[0];
    return g;
  }
  Vec grad_y(const Vec& x, const Vec&) const override {
    Vec g = Vec::Zero(x.size());
    g[0] = x[0];
    return g;
  }
  Mat cross_hessian(const Vec& x, const Vec&) const override {
    Mat m = Mat::Zero(x.size(), x.size());
    m(0, 0) = 1.0;
    return m;
  }
};

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

ConvexPotential potential_by_name(const std::string& name, double scale) {
  if (name == "quadratic") return ConvexPotential::quadratic(scale);
  if (name == "hyperbolic") return ConvexPotential::hyperbolic(scale);
  if (name == "zero") return ConvexPotential::zero();
  throw InvalidArgument("unknown potential '" + name + "'");
}

bool singular(const Mat& m, double tol) {
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return std::abs(m.determinant()) <= tol * std::pow(scale, static_cast<double>(m.rows()));
}

// Damped Newton for residual(z) = 0 with Jacobian jac(z); shared by both
// exponential maps.
template <class Residual, class Jacobian>
Vec damped_newton(Vec z, Residual residual, Jacobian jac, const NewtonOptions& opt,
                  const char* what) {
  Vec r = residual(z);
  double rn = r.norm();
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (rn <= opt.tol) return z;
    Mat j = jac(z);
    if (singular(j, opt.singular_tol))
      throw SingularTwist(std::string(what) + ": mixed Hessian is singular");
    Vec step = j.partialPivLu().solve(-r);
    double t = 1.0;
    Vec trial = z + step;
    Vec rt = residual(trial);
    double rtn = rt.norm();
    for (int halving = 0; halving < 40 && !(rtn < rn); ++halving) {
      t *= 0.5;
      trial = z + t * step;
      rt = residual(trial);
      rtn = rt.norm();
    }
    if (!(rtn < rn) && rn > opt.tol) {
      // no decrease possible at double precision; accept if close enough
      if (rn <= 1e3 * opt.tol) return z;
      throw NoConvergence(std::string(what) + ": line search stalled");
    }
    z = std::move(trial);
    r = std::move(rt);
    rn = rtn;
  }
  if (rn <= opt.tol) return z;
  throw NoConvergence(std::string(what) + ": iteration limit reached");
}

}  // namespace

PreferencePtr make_bilinear(Box x_domain, Box y_domain) {
  return std::make_shared<Bilinear>(std::move(x_domain), std::move(y_domain));
}

PreferencePtr make_separable_concave(Box x_domain, Box y_domain, ConvexPotential f,
                                     ConvexPotential g) {
  return std::make_shared<SeparableConcave>(std::move(x_domain), std::move(y_domain),
                                            std::move(f), std::move(g));
}

PreferencePtr make_rank_one_perturbed(Box x_domain, Box y_domain, ConvexPotential f, Vec a) {
  return std::make_shared<RankOnePerturbed>(std::move(x_domain), std::move(y_domain),
                                            std::move(f), std::move(a));
}

PreferencePtr make_custom(const std::string& name, Box x_domain, Box y_domain,
                          const std::map<std::string, double>& params) {
  if (name == "quartic_perturbed") {
    return std::make_shared<QuarticPerturbed>(std::move(x_domain), std::move(y_domain),
                                              param_or(params, "eps", 0.5));
  }
  if (name == "degenerate_twist") {
    if (x_domain.dim() != 2) throw InvalidArgument("degenerate_twist is defined in 2-d");
    return std::make_shared<DegenerateTwist>(std::move(x_domain), std::move(y_domain));
  }
  throw InvalidArgument("unknown custom preference '" + name + "'");
}

std::vector<std::string> custom_preference_names() {
  return {"degenerate_twist", "quartic_perturbed"};
}

PreferencePtr make_preference(const PreferenceSpec& spec, Box x_domain, Box y_domain) {
  if (spec.kind == "bilinear") return make_bilinear(std::move(x_domain), std::move(y_domain));
  if (spec.kind == "separable_concave") {
    return make_separable_concave(std::move(x_domain), std::move(y_domain),
                                  potential_by_name(spec.potential, spec.potential_scale),
                                  potential_by_name(spec.y_potential, spec.y_potential_scale));
  }
  if (spec.kind == "rank_one_perturbed") {
    int n = x_domain.dim();
    if (static_cast<int>(spec.a.size()) != n)
      throw InvalidArgument("rank_one_perturbed needs a vector 'a' of the domain dimension");
    Vec a = Eigen::Map<const Vec>(spec.a.data(), n);
    return make_rank_one_perturbed(std::move(x_domain), std::move(y_domain),
                                   potential_by_name(spec.potential, spec.potential_scale), a);
  }
  if (spec.kind == "custom") return make_custom(spec.name, std::move(x_domain), std::move(y_domain), spec.params);
  throw InvalidArgument("unknown preference kind '" + spec.kind + "'");
}

// ---------------------------------------------------------------------------
// Exponential maps

Vec b_exponential(const PreferenceFunction& b, const Vec& x, const Vec& p,
                  const NewtonOptions& options) {
  if (!x.allFinite() || !p.allFinite()) throw InvalidArgument("non-finite input to b_exponential");
  Vec y = damped_newton(
      p, [&](const Vec& y) -> Vec { return b.grad_x(x, y) - p; },
      [&](const Vec& y) -> Mat { return b.cross_hessian(x, y); }, options, "b_exponential");
  if (options.check_range && !b.y_domain().contains(y, options.range_tol))
    throw OutOfRange("b_exponential: solution leaves the closed product domain");
  return y;
}

Vec x_exponential(const PreferenceFunction& b, const Vec& y, const Vec& target,
                  const NewtonOptions& options) {
  if (!y.allFinite() || !target.allFinite())
    throw InvalidArgument("non-finite input to x_exponential");
  Vec x = damped_newton(
      target, [&](const Vec& x) -> Vec { return b.grad_y(x, y) - target; },
      [&](const Vec& x) -> Mat { return b.cross_hessian(x, y).transpose(); }, options,
      "x_exponential");
  if (options.check_range && !b.x_domain().contains(x, options.range_tol))
    throw OutOfRange("x_exponential: solution leaves the closed product domain");
  return x;
}

// ---------------------------------------------------------------------------
// Transforms

TransformResult b_transform(const PreferenceFunction& b, std::span<const Vec> x_points,
                            std::span<const Vec> y_points, std::span<const double> v) {
  if (v.size() != y_points.size()) throw InvalidArgument("values do not match the Y-grid");
  TransformResult out;
  out.values.assign(x_points.size(), -std::numeric_limits<double>::infinity());
  out.argmax.assign(x_points.size(), 0);
  if (y_points.empty()) return out;
  parallel_for(x_points.size(), [&](std::size_t i) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < y_points.size(); ++j) {
      double c = b.value(x_points[i], y_points[j]) - v[j];
      if (c > best) {
        best = c;
        arg = j;
      }
    }
    out.values[i] = best;
    out.argmax[i] = arg;
  });
  return out;
}

TransformResult bstar_transform(const PreferenceFunction& b, std::span<const Vec> x_points,
                                std::span<const Vec> y_points, std::span<const double> u) {
  if (u.size() != x_points.size()) throw InvalidArgument("values do not match the X-grid");
  TransformResult out;
  out.values.assign(y_points.size(), -std::numeric_limits<double>::infinity());
  out.argmax.assign(y_points.size(), 0);
  if (x_points.empty()) return out;
  parallel_for(y_points.size(), [&](std::size_t j) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < x_points.size(); ++i) {
      double c = b.value(x_points[i], y_points[j]) - u[i];
      if (c > best) {
        best = c;
        arg = i;
      }
    }
    out.values[j] = best;
    out.argmax[j] = arg;
  });
  return out;
}

std::vector<double> double_transform(const PreferenceFunction& b, std::span<const Vec> x_points,
                                     std::span<const Vec> y_points, std::span<const double> u) {
  auto star = bstar_transform(b, x_points, y_points, u);
  return b_transform(b, x_points, y_points, star.values).values;
}

BConvexityResult is_b_convex(const PreferenceFunction& b, std::span<const Vec> x_points,
                             std::span<const Vec> y_points, std::span<const double> u,
                             double tol) {
  auto env = double_transform(b, x_points, y_points, u);
  BConvexityResult r;
  for (std::size_t i = 0; i < u.size(); ++i)
    r.max_deviation = std::max(r.max_deviation, std::abs(u[i] - env[i]));
  r.b_convex = r.max_deviation <= tol;
  return r;
}

// ---------------------------------------------------------------------------
// Structural checks

namespace {

Vec sample_in(const Box& box, std::mt19937_64& rng, double shrink = 0.0) {
  Vec p(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    double w = box.upper[i] - box.lower[i];
    p[i] = uniform(rng, box.lower[i] + shrink * w, box.upper[i] - shrink * w);
  }
  return p;
}

Vec unit_direction(std::mt19937_64& rng, int dim) {
  Vec d(dim);
  do {
    for (int i = 0; i < dim; ++i) d[i] = uniform(rng, -1.0, 1.0);
  } while (d.norm() < 1e-3 || d.norm() > 1.0);
  return d / d.norm();
}

}  // namespace

TwistReport check_twist(const PreferenceFunction& b, const SampleSpec& samples,
                        double threshold) {
  std::vector<double> dets(samples.count);
  std::vector<Vec> xs(samples.count), ys(samples.count);
  parallel_for(samples.count, [&](std::size_t k) {
    auto rng = stream_rng(samples.seed, k);
    xs[k] = sample_in(b.x_domain(), rng);
    ys[k] = sample_in(b.y_domain(), rng);
    dets[k] = std::abs(b.cross_hessian(xs[k], ys[k]).determinant());
  });
  TwistReport r;
  r.samples = samples.count;
  r.threshold = threshold;
  r.min_abs_det = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples.count; ++k) {
    if (dets[k] < r.min_abs_det) {
      r.min_abs_det = dets[k];
      r.witness_x = xs[k];
      r.witness_y = ys[k];
    }
  }
  r.pass = r.min_abs_det > threshold;
  return r;
}

double cross_curvature(const PreferenceFunction& b, const Vec& x0, const Vec& y0,
                       const Vec& xi, const Vec& eta) {
  static const double kStep = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0);
  const double h = kStep * std::max(1.0, std::max(xi.norm(), eta.norm()));
  static constexpr int kOffsets[4] = {-2, -1, 1, 2};
  static constexpr double kWeights[4] = {1.0, -8.0, 8.0, -1.0};  // / (12 h)

  NewtonOptions opt;
  opt.check_range = false;
  Vec dyb0 = b.grad_y(x0, y0);
  Vec dxb0 = b.grad_x(x0, y0);

  std::vector<Vec> xs(4), dxs(4), ys(4), dys(4);
  for (int k = 0; k < 4; ++k) {
    double s = kOffsets[k] * h;
    xs[k] = x_exponential(b, y0, dyb0 + s * xi, opt);
    // D_y b(x(s), y0) = const + s xi  =>  M^T x'(s) = xi
    dxs[k] = b.cross_hessian(xs[k], y0).transpose().partialPivLu().solve(xi);
    ys[k] = b_exponential(b, x0, dxb0 + s * eta, opt);
    // D_x b(x0, y(t)) = const + t eta  =>  M y'(t) = eta
    dys[k] = b.cross_hessian(x0, ys[k]).partialPivLu().solve(eta);
  }
  // g(s, t) = d^2/ds dt b(x(s), y(t)) = x'(s)^T D_xy b y'(t)
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double g = dxs[i].dot(b.cross_hessian(xs[i], ys[j]) * dys[j]);
      acc += kWeights[i] * kWeights[j] * g;
    }
  }
  return acc / (144.0 * h * h);
}

CrossCurvatureReport check_cross_curvature(const PreferenceFunction& b,
                                           const SampleSpec& samples, double tolerance) {
  int n = b.dim();
  std::vector<double> values(samples.count);
  std::vector<Vec> xs(samples.count), ys(samples.count), xis(samples.count),
      etas(samples.count);
  parallel_for(samples.count, [&](std::size_t k) {
    auto rng = stream_rng(samples.seed, k);
    xs[k] = sample_in(b.x_domain(), rng, 0.05);
    ys[k] = sample_in(b.y_domain(), rng, 0.05);
    xis[k] = unit_direction(rng, n);
    etas[k] = unit_direction(rng, n);
    values[k] = cross_curvature(b, xs[k], ys[k], xis[k], etas[k]);
  });
  CrossCurvatureReport r;
  r.samples = samples.count;
  r.tolerance = tolerance;
  r.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples.count; ++k) {
    if (values[k] < r.min_value) {
      r.min_value = values[k];
      r.witness_x = xs[k];
      r.witness_y = ys[k];
      r.witness_xi = xis[k];
      r.witness_eta = etas[k];
    }
  }
  r.pass = r.min_value >= -tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Normalization

Vec NormalizedChart::to_x(const PreferenceFunction& b, const Vec& x_tilde_point) const {
  NewtonOptions opt;
  opt.check_range = false;
  return x_exponential(b, y0, b.grad_y(x0, y0) + x_tilde_point, opt);
}

NormalizedChart normalize_coordinates(const PreferenceFunction& b,
                                      std::span<const Vec> x_points,
                                      std::span<const double> u, std::size_t x0_index,
                                      const Vec& y0, std::span<const Vec> y_points) {
  if (u.size() != x_points.size()) throw InvalidArgument("values do not match the X-grid");
  if (x0_index >= x_points.size()) throw InvalidArgument("base node out of range");
  NormalizedChart chart;
  chart.x0 = x_points[x0_index];
  chart.y0 = y0;
  const Vec& x0 = chart.x0;
  if (singular(b.cross_hessian(x0, y0), 1e-12))
    throw SingularTwist("normalize_coordinates: coordinate maps degenerate at the base point");

  Vec dyb_base = b.grad_y(x0, y0);
  Vec dxb_base = b.grad_x(x0, y0);
  double b00 = b.value(x0, y0);
  double u0 = u[x0_index];

  chart.x_tilde.resize(x_points.size());
  chart.u_tilde.resize(x_points.size());
  for (std::size_t i = 0; i < x_points.size(); ++i) {
    const Vec& x = x_points[i];
    chart.x_tilde[i] = b.grad_y(x, y0) - dyb_base;
    chart.u_tilde[i] = u[i] - (u0 + b.value(x, y0) - b00);
  }
  chart.u_tilde[x0_index] = 0.0;
  chart.y_tilde.resize(y_points.size());
  for (std::size_t j = 0; j < y_points.size(); ++j)
    chart.y_tilde[j] = b.grad_x(x0, y_points[j]) - dxb_base;

  chart.residual.resize(static_cast<Eigen::Index>(x_points.size()),
                        static_cast<Eigen::Index>(y_points.size()));
  for (std::size_t j = 0; j < y_points.size(); ++j) {
    double b0y = b.value(x0, y_points[j]);
    for (std::size_t i = 0; i < x_points.size(); ++i) {
      double bt = b.value(x_points[i], y_points[j]) - (b0y + b.value(x_points[i], y0) - b00);
      double r = bt - chart.x_tilde[i].dot(chart.y_tilde[j]);
      chart.residual(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
      chart.max_abs_residual = std::max(chart.max_abs_residual, std::abs(r));
    }
  }
  return chart;
}

}  // namespace screener

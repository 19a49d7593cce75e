#include "screener/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "screener/errors.hpp"
#include "screener/parallel.hpp"

namespace screener {

// ---------------------------------------------------------------------------
// ScalarProfile

ScalarProfile ScalarProfile::constant(double value) {
  ScalarProfile p;
  p.level = value;
  p.validate();
  return p;
}

ScalarProfile ScalarProfile::piecewise_linear(int axis, std::vector<double> knots,
                                              std::vector<double> values) {
  ScalarProfile p;
  p.kind = Kind::piecewise_linear;
  p.axis = axis;
  p.knots = std::move(knots);
  p.values = std::move(values);
  p.validate();
  return p;
}

void ScalarProfile::validate() const {
  if (kind == Kind::constant) {
    if (!std::isfinite(level)) throw InvalidArgument("profile level must be finite");
    return;
  }
  if (axis < 0 || axis > 1) throw InvalidArgument("profile axis must be 0 or 1");
  if (knots.size() < 2 || knots.size() != values.size())
    throw InvalidArgument("profile table needs at least two knots and one value per knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(values[i]))
      throw InvalidArgument("profile table must be finite");
    if (i > 0 && !(knots[i] > knots[i - 1]))
      throw InvalidArgument("profile knots must be strictly increasing");
  }
}

double ScalarProfile::operator()(const Vec& x) const {
  if (kind == Kind::constant) return level;
  double t = x[axis];
  if (t <= knots.front()) return values.front();
  if (t >= knots.back()) return values.back();
  auto it = std::upper_bound(knots.begin(), knots.end(), t);
  std::size_t i = static_cast<std::size_t>(it - knots.begin());
  double s = (t - knots[i - 1]) / (knots[i] - knots[i - 1]);
  return values[i - 1] + s * (values[i] - values[i - 1]);
}

double ScalarProfile::min() const {
  return kind == Kind::constant ? level : *std::min_element(values.begin(), values.end());
}

double ScalarProfile::max() const {
  return kind == Kind::constant ? level : *std::max_element(values.begin(), values.end());
}

double ScalarProfile::lipschitz() const {
  if (kind == Kind::constant) return 0.0;
  double l = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i)
    l = std::max(l, std::abs(values[i] - values[i - 1]) / (knots[i] - knots[i - 1]));
  return l;
}

void Functional::validate() const {
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("q must exceed 1");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be positive");
  if (!f1 || !f1_grad || !f1_hess || !f0 || !f0_dz || !f0_dzz || !eta || !g)
    throw InvalidArgument("functional is missing an evaluator");
  density.validate();
  if (density.min() < 0.0) throw InvalidArgument("density must be non-negative");
  if (uniformly_positive && !(lambda > 0.0))
    throw InvalidArgument("uniformly positive density needs lambda > 0");
}

// ---------------------------------------------------------------------------
// Model families

namespace {

double max_norm(const Box& box) {
  double s = 0.0;
  for (int i = 0; i < box.dim(); ++i) {
    double m = std::max(std::abs(box.lower[i]), std::abs(box.upper[i]));
    s += m * m;
  }
  return std::sqrt(s);
}

// |y|^q with gradient q|y|^(q-2) y and Hessian q(|y|^(q-2) I + (q-2)|y|^(q-2) yhat yhat^T).
Mat power_hessian(const Vec& y, double q) {
  const auto n = y.size();
  double r = y.norm();
  if (q == 2.0) return 2.0 * Mat::Identity(n, n);
  if (r == 0.0) {
    if (q > 2.0) return Mat::Zero(n, n);
    r = 1e-8;  // the q < 2 Hessian is unbounded at the origin
  }
  Vec yhat = y.norm() > 0.0 ? Vec(y / y.norm()) : Vec(Vec::Unit(n, 0));
  double rq2 = std::pow(r, q - 2.0);
  return q * rq2 * (Mat::Identity(n, n) + (q - 2.0) * yhat * yhat.transpose());
}

Vec power_gradient(const Vec& y, double q) {
  double r = y.norm();
  if (r == 0.0) return Vec::Zero(y.size());
  return q * std::pow(r, q - 2.0) * y;
}

double certified_constant(double q) { return derive_c(q).c; }

void attach_linear_f0(Functional& m, const ScalarProfile& f) {
  m.f0 = [f](const Vec& x, double z) { return f(x) * z; };
  m.f0_dz = [f](const Vec& x, double) { return f(x); };
  m.f0_dzz = [](const Vec&, double) { return 0.0; };
  m.source = [f](const Vec& x) { return f(x); };
  double bound = std::max(std::abs(f.min()), std::abs(f.max()));
  m.eta = [bound](double) { return bound; };
}

}  // namespace

Functional rochet_chone(double q, const ScalarProfile& gamma, const Box& x_domain) {
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("q must exceed 1");
  gamma.validate();
  if (!(gamma.min() > 0.0)) throw InvalidArgument("density must be uniformly positive");

  Functional m;
  m.name = "rochet_chone";
  m.q = q;
  m.form = natural_form(q);
  m.density = gamma;
  m.uniformly_positive = true;
  m.lambda = gamma.min();
  m.delta = m.lambda * certified_constant(q) / q;

  m.f1 = [q, gamma](const Vec& x, const Vec& y) {
    return (std::pow(y.norm(), q) / q - x.dot(y)) * gamma(x);
  };
  m.f1_grad = [q, gamma](const Vec& x, const Vec& y) -> Vec {
    return (power_gradient(y, q) / q - x) * gamma(x);
  };
  m.f1_hess = [q, gamma](const Vec& x, const Vec& y) -> Mat {
    return power_hessian(y, q) * (gamma(x) / q);
  };
  attach_linear_f0(m, gamma);

  const double xmax = std::max(1.0, max_norm(x_domain));
  const double c0 = std::max(gamma.max() * xmax, gamma.lipschitz() * xmax + gamma.max());
  m.g = [c0, q](const Vec& y) { return c0 * (std::pow(y.norm(), q - 1.0) + 1.0); };
  m.validate();
  return m;
}

Functional power_source(double q, const ScalarProfile& f, const Box& x_domain,
                        double coefficient) {
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("q must exceed 1");
  f.validate();
  if (coefficient < 0.0) coefficient = 1.0 / q;
  if (!(coefficient > 0.0)) throw InvalidArgument("coefficient must be positive");
  (void)x_domain;

  Functional m;
  m.name = "power_source";
  m.q = q;
  m.form = natural_form(q);
  m.density = ScalarProfile::constant(1.0);
  m.uniformly_positive = true;
  m.lambda = 1.0;
  m.delta = coefficient * certified_constant(q);

  const double k = coefficient;
  m.f1 = [q, k](const Vec&, const Vec& y) { return k * std::pow(y.norm(), q); };
  m.f1_grad = [q, k](const Vec&, const Vec& y) -> Vec { return k * power_gradient(y, q); };
  m.f1_hess = [q, k](const Vec&, const Vec& y) -> Mat { return k * power_hessian(y, q); };
  attach_linear_f0(m, f);
  m.g = [q, k](const Vec& y) { return k * q * (std::pow(y.norm(), q - 1.0) + 1.0); };
  m.validate();
  return m;
}

Functional log_power(const ScalarProfile& f, const Box& x_domain) {
  f.validate();
  (void)x_domain;
  Functional m;
  m.name = "log_power";
  m.q = 2.0;
  m.form = ConvexityForm::log_weighted;
  m.density = ScalarProfile::constant(1.0);
  m.uniformly_positive = true;
  m.lambda = 1.0;
  m.delta = 0.5;

  m.f1 = [](const Vec&, const Vec& y) {
    double r = y.norm();
    return r * std::log1p(r);
  };
  m.f1_grad = [](const Vec&, const Vec& y) -> Vec {
    double r = y.norm();
    if (r == 0.0) return Vec::Zero(y.size());
    return (std::log1p(r) + r / (1.0 + r)) / r * y;
  };
  m.f1_hess = [](const Vec&, const Vec& y) -> Mat {
    const auto n = y.size();
    double r = y.norm();
    if (r == 0.0) return 2.0 * Mat::Identity(n, n);
    Vec yhat = y / r;
    double d1 = std::log1p(r) + r / (1.0 + r);
    double d2 = 1.0 / (1.0 + r) + 1.0 / ((1.0 + r) * (1.0 + r));
    Mat proj = yhat * yhat.transpose();
    return d2 * proj + (d1 / r) * (Mat::Identity(n, n) - proj);
  };
  attach_linear_f0(m, f);
  m.g = [](const Vec& y) {
    return std::log1p(y.norm()) + 1.0;
  };
  m.validate();
  return m;
}

Functional linear_tariff(const ScalarProfile& gamma, const Box& x_domain, double delta) {
  gamma.validate();
  Functional m;
  m.name = "linear_tariff";
  m.q = 2.0;
  m.form = ConvexityForm::power_q;
  m.density = gamma;
  m.uniformly_positive = gamma.min() > 0.0;
  m.lambda = std::max(0.0, gamma.min());
  m.delta = delta;
  m.f1 = [gamma](const Vec& x, const Vec& y) { return -x.dot(y) * gamma(x); };
  m.f1_grad = [gamma](const Vec& x, const Vec&) -> Vec { return -x * gamma(x); };
  m.f1_hess = [](const Vec& x, const Vec&) -> Mat { return Mat::Zero(x.size(), x.size()); };
  attach_linear_f0(m, gamma);
  const double xmax = std::max(1.0, max_norm(x_domain));
  const double c0 = gamma.lipschitz() * xmax + gamma.max() * xmax + gamma.max();
  m.g = [c0](const Vec&) { return c0; };
  m.validate();
  return m;
}

void ParticipationConstraint::validate(const PreferenceFunction& b) const {
  if (!std::isfinite(a0)) throw InvalidArgument("a0 must be finite");
  if (y0.size() != b.dim()) throw InvalidArgument("y0 has the wrong dimension");
  if (!b.y_domain().contains(y0, 1e-12)) throw InvalidArgument("y0 must lie in the closure of Y");
}

// ---------------------------------------------------------------------------
// Integrand

namespace {

Vec product_for(const PreferenceFunction& b, const Vec& x, const Vec& p) {
  if (auto y = b.exponential_closed_form(x, p)) return *y;
  NewtonOptions opts;
  opts.check_range = false;
  return b_exponential(b, x, p, opts);
}

bool identity_twist(const PreferenceFunction& b) {
  return b.kind() == PreferenceKind::bilinear || b.kind() == PreferenceKind::separable_concave;
}

Vec composed_gradient(const Functional& model, const PreferenceFunction& b, const Vec& x,
                      const Vec& p, double* value) {
  Vec y = product_for(b, x, p);
  if (value) *value = model.f1(x, y);
  Vec gy = model.f1_grad(x, y);
  if (identity_twist(b)) return gy;
  Mat m = b.cross_hessian(x, y);
  Eigen::PartialPivLU<Mat> lu(m.transpose());
  return lu.solve(gy);
}

}  // namespace

IntegrandValue evaluate_integrand(const Functional& model, const PreferenceFunction& b,
                                  const Vec& x, const Vec& p, bool with_hessian) {
  IntegrandValue out;
  if (identity_twist(b)) {
    Vec y = product_for(b, x, p);
    out.value = model.f1(x, y);
    out.grad = model.f1_grad(x, y);
    if (with_hessian) out.hess = model.f1_hess(x, y);
    return out;
  }
  out.grad = composed_gradient(model, b, x, p, &out.value);
  if (with_hessian) {
    const auto n = p.size();
    out.hess.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double h = 1e-6 * (1.0 + std::abs(p[j]));
      Vec pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      out.hess.col(j) = (composed_gradient(model, b, x, pp, nullptr) -
                         composed_gradient(model, b, x, pm, nullptr)) / (2.0 * h);
    }
    out.hess = 0.5 * (out.hess + out.hess.transpose()).eval();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Energy

EnergyEvaluator::EnergyEvaluator(const Functional& model, const PreferenceFunction& b,
                                 const GridDomain& domain)
    : model_(model), b_(b), domain_(domain) {
  domain_.validate();
  if (b.dim() != domain_.dim) throw InvalidArgument("preference and grid dimensions differ");
  points_ = domain_.points();
  weights_ = domain_.weights();
  ops_ = gradient_operators(domain_);
}

Mat EnergyEvaluator::gradients(std::span<const double> u) const {
  if (u.size() != domain_.size()) throw InvalidArgument("values do not match the grid");
  Eigen::Map<const Vec> v(u.data(), static_cast<Eigen::Index>(u.size()));
  Mat g(static_cast<Eigen::Index>(u.size()), domain_.dim);
  for (int a = 0; a < domain_.dim; ++a) g.col(a) = ops_[a] * v;
  return g;
}

double EnergyEvaluator::value(std::span<const double> u) const {
  Mat g = gradients(u);
  std::vector<double> terms(u.size());
  parallel_for(u.size(), [&](std::size_t k) {
    Vec p = g.row(static_cast<Eigen::Index>(k)).transpose();
    Vec y = product_for(b_, points_[k], p);
    terms[k] = weights_[k] * (model_.f1(points_[k], y) + model_.f0(points_[k], u[k]));
  });
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

double EnergyEvaluator::value_and_gradient(std::span<const double> u, Vec& grad) const {
  Mat g = gradients(u);
  const auto n = static_cast<Eigen::Index>(u.size());
  std::vector<double> terms(u.size());
  Mat flux(n, domain_.dim);
  Vec local(n);
  parallel_for(u.size(), [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    Vec p = g.row(i).transpose();
    IntegrandValue iv = evaluate_integrand(model_, b_, points_[k], p, false);
    terms[k] = weights_[k] * (iv.value + model_.f0(points_[k], u[k]));
    flux.row(i) = weights_[k] * iv.grad.transpose();
    local[i] = weights_[k] * model_.f0_dz(points_[k], u[k]);
  });
  grad = local;
  for (int a = 0; a < domain_.dim; ++a) grad += ops_[a].transpose() * flux.col(a);
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

Vec EnergyEvaluator::gradient(std::span<const double> u) const {
  Vec grad;
  value_and_gradient(u, grad);
  return grad;
}

Eigen::SparseMatrix<double> EnergyEvaluator::hessian(std::span<const double> u) const {
  Mat g = gradients(u);
  const auto n = static_cast<Eigen::Index>(u.size());
  const int d = domain_.dim;
  std::vector<Mat> hess(u.size());
  Vec local(n);
  parallel_for(u.size(), [&](std::size_t k) {
    Vec p = g.row(static_cast<Eigen::Index>(k)).transpose();
    hess[k] = weights_[k] * evaluate_integrand(model_, b_, points_[k], p, true).hess;
    local[static_cast<Eigen::Index>(k)] = weights_[k] * model_.f0_dzz(points_[k], u[k]);
  });
  Eigen::SparseMatrix<double> h(n, n);
  std::vector<Eigen::Triplet<double>> diag;
  for (Eigen::Index k = 0; k < n; ++k) diag.emplace_back(k, k, local[k]);
  h.setFromTriplets(diag.begin(), diag.end());
  for (int a = 0; a < d; ++a) {
    for (int c = 0; c < d; ++c) {
      Vec wdiag(n);
      for (Eigen::Index k = 0; k < n; ++k) wdiag[k] = hess[static_cast<std::size_t>(k)](a, c);
      h += ops_[a].transpose() * wdiag.asDiagonal() * ops_[c];
    }
  }
  h.prune(0.0);
  return h;
}

double evaluate_energy(const Functional& model, const PreferenceFunction& b, const ConvexGrid& u) {
  return EnergyEvaluator(model, b, u.domain()).value(u.values());
}

// ---------------------------------------------------------------------------
// Hypothesis checks

namespace {

Vec sample_point(std::mt19937_64& rng, const Box& box) {
  Vec x(box.dim());
  for (int i = 0; i < box.dim(); ++i) x[i] = uniform(rng, box.lower[i], box.upper[i]);
  return x;
}

Vec sample_cube(std::mt19937_64& rng, int dim, double radius) {
  Vec p(dim);
  for (int i = 0; i < dim; ++i) p[i] = uniform(rng, -radius, radius);
  return p;
}

}  // namespace

H1Report check_H1(const Functional& model, const PreferenceFunction& b, const SampleSpec& samples,
                  std::size_t max_witnesses) {
  model.validate();
  H1Report rep;
  rep.samples = samples.count;
  rep.delta = model.delta;
  rep.form = model.form;
  const int n = b.dim();

  struct Outcome {
    HypothesisViolation v;
    bool violated = false;
    double ratio = std::numeric_limits<double>::infinity();
  };
  std::vector<Outcome> out(samples.count);
  parallel_for(samples.count, [&](std::size_t s) {
    auto rng = stream_rng(samples.seed, s);
    Vec x = sample_point(rng, b.x_domain());
    Vec p1 = sample_cube(rng, n, samples.radius);
    Vec p2 = sample_cube(rng, n, samples.radius);
    IntegrandValue a = evaluate_integrand(model, b, x, p1, false);
    IntegrandValue c = evaluate_integrand(model, b, x, p2, false);
    double lin = c.grad.dot(p1 - p2);
    double gap = a.value - c.value - lin;
    double bound = qpower_bound(p2, p1, model.q, model.delta, model.form);
    double scale = std::abs(a.value) + std::abs(c.value) + std::abs(lin);
    Outcome& o = out[s];
    if (bound > 0.0) o.ratio = gap / bound;
    if (gap < bound - 1e-9 * scale - 64.0 * std::numeric_limits<double>::epsilon()) {
      o.violated = true;
      o.v = HypothesisViolation{x, p1, p2, gap, bound};
    }
  });
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  for (auto& o : out) {
    rep.worst_ratio = std::min(rep.worst_ratio, o.ratio);
    if (!o.violated) continue;
    ++rep.violation_count;
    if (rep.violations.size() < max_witnesses) rep.violations.push_back(std::move(o.v));
  }
  if (!std::isfinite(rep.worst_ratio)) rep.worst_ratio = 0.0;
  return rep;
}

H2H3Report check_H2_H3(const Functional& model, const PreferenceFunction& b,
                       const SampleSpec& samples, double tolerance) {
  model.validate();
  H2H3Report rep;
  rep.samples = samples.count;
  rep.tolerance = tolerance;
  const int n = b.dim();
  struct Ratios {
    double f0 = 0.0, dp = 0.0, mixed = 0.0;
  };
  std::vector<Ratios> out(samples.count);
  parallel_for(samples.count, [&](std::size_t s) {
    auto rng = stream_rng(samples.seed, s);
    Vec x = sample_point(rng, b.x_domain());
    double z = uniform(rng, -samples.radius, samples.radius);
    Vec p = sample_cube(rng, n, samples.radius);
    Vec y = product_for(b, x, p);
    auto ratio = [](double value, double envelope) {
      if (envelope > 0.0) return value / envelope;
      return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    };
    Ratios& r = out[s];
    r.f0 = ratio(std::abs(model.f0_dz(x, z)), model.eta(z));
    Vec grad = evaluate_integrand(model, b, x, p, false).grad;
    double gy = model.g(y);
    r.dp = ratio(grad.norm(), gy);
    for (int i = 0; i < n; ++i) {
      double h = 1e-5 * (1.0 + std::abs(x[i]));
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      double d = (evaluate_integrand(model, b, xp, p, false).grad[i] -
                  evaluate_integrand(model, b, xm, p, false).grad[i]) / (2.0 * h);
      r.mixed = std::max(r.mixed, ratio(std::abs(d), gy));
    }
  });
  for (const auto& r : out) {
    rep.max_ratio_f0 = std::max(rep.max_ratio_f0, r.f0);
    rep.max_ratio_dp = std::max(rep.max_ratio_dp, r.dp);
    rep.max_ratio_mixed = std::max(rep.max_ratio_mixed, r.mixed);
  }
  rep.pass = rep.max_ratio_f0 <= 1.0 + tolerance && rep.max_ratio_dp <= 1.0 + tolerance &&
             rep.max_ratio_mixed <= 1.0 + tolerance;
  return rep;
}

}  // namespace screener

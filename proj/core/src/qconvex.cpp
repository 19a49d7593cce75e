#include "screener/qconvex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "screener/errors.hpp"
#include "screener/parallel.hpp"

namespace screener {
namespace {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
}

void require_same_dim(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw InvalidArgument("x and y differ in dimension");
}

// Rounding slack for a comparison of quantities of magnitude `scale`.
double roundoff(double scale) {
  return 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

// gap for the normalized configuration x = s(cos t, sin t), y = x + e1.
double normalized_gap(double s, double t, double q) {
  double ct = std::cos(t);
  double ny2 = s * s + 2.0 * s * ct + 1.0;
  double ny = std::sqrt(std::max(0.0, ny2));
  double middle = s > 0.0 ? q * std::pow(s, q - 1.0) * ct : 0.0;
  return std::pow(ny, q) - std::pow(s, q) - middle;
}

Vec random_vec(std::mt19937_64& rng, int dim, double radius) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = uniform(rng, -radius, radius);
  return v;
}

struct Sample {
  Vec x, y;
  double gap, bound, ratio;
  bool violated;
};

template <class GapFn, class BoundFn, class ScaleFn>
VerificationReport run_verification(double q, double c, ConvexityForm form,
                                    const SampleSpec& spec,
                                    std::span<const std::pair<Vec, Vec>> extra,
                                    std::size_t max_witnesses, GapFn gap_fn,
                                    BoundFn bound_fn, ScaleFn scale_fn) {
  if (spec.min_dim < 1 || spec.max_dim < spec.min_dim)
    throw InvalidArgument("sample dimension range is empty");
  std::size_t n_extra = extra.size();
  std::size_t total = n_extra + spec.count;
  std::vector<Sample> out(total);

  auto evaluate = [&](const Vec& x, const Vec& y, Sample& s) {
    require_finite(x, "x");
    require_finite(y, "y");
    require_same_dim(x, y);
    s.x = x;
    s.y = y;
    s.gap = gap_fn(x, y);
    s.bound = bound_fn(x, y);
    s.violated = s.gap < s.bound - roundoff(scale_fn(x, y));
    double unit = s.bound / c;
    s.ratio = unit > 0.0 ? s.gap / unit : std::numeric_limits<double>::infinity();
  };

  for (std::size_t i = 0; i < n_extra; ++i) evaluate(extra[i].first, extra[i].second, out[i]);
  parallel_for(spec.count, [&](std::size_t k) {
    auto rng = stream_rng(spec.seed, k);
    int span = spec.max_dim - spec.min_dim + 1;
    int dim = spec.min_dim + static_cast<int>(rng() % static_cast<std::uint64_t>(span));
    Vec x = random_vec(rng, dim, spec.radius);
    Vec y = random_vec(rng, dim, spec.radius);
    evaluate(x, y, out[n_extra + k]);
  });

  VerificationReport report;
  report.q = q;
  report.c = c;
  report.form = form;
  report.samples = total;
  report.worst_ratio = std::numeric_limits<double>::infinity();
  for (auto& s : out) {
    report.worst_ratio = std::min(report.worst_ratio, s.ratio);
    if (!s.violated) continue;
    ++report.violation_count;
    if (report.violations.size() < max_witnesses)
      report.violations.push_back({std::move(s.x), std::move(s.y), s.gap, s.bound});
  }
  return report;
}

}  // namespace

const char* to_string(ConvexityForm form) {
  switch (form) {
    case ConvexityForm::power_q: return "power_q";
    case ConvexityForm::power_2_weighted: return "power_2_weighted";
    case ConvexityForm::log_weighted: return "log";
  }
  return "unknown";
}

ConvexityForm natural_form(double q) {
  return q >= 2.0 ? ConvexityForm::power_q : ConvexityForm::power_2_weighted;
}

double qpower_gap(const Vec& x, const Vec& y, double q) {
  require_finite(x, "x");
  require_finite(y, "y");
  require_same_dim(x, y);
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("q must exceed 1");
  double nx = x.norm();
  double ny = y.norm();
  double middle = nx > 0.0 ? q * std::pow(nx, q - 2.0) * x.dot(y - x) : 0.0;
  return std::pow(ny, q) - std::pow(nx, q) - middle;
}

double qpower_bound(const Vec& x, const Vec& y, double q, double c, ConvexityForm form) {
  double d = (y - x).norm();
  switch (form) {
    case ConvexityForm::power_q:
      return c * std::pow(d, q);
    case ConvexityForm::power_2_weighted:
      return c * d * d * std::pow(1.0 + x.norm() + y.norm(), q - 2.0);
    case ConvexityForm::log_weighted:
      return c * d * d / (1.0 + x.norm() + y.norm());
  }
  return 0.0;
}

double logpower_gap(const Vec& x, const Vec& y) {
  require_finite(x, "x");
  require_finite(y, "y");
  require_same_dim(x, y);
  double nx = x.norm();
  double ny = y.norm();
  double slope = std::log1p(nx) + nx / (1.0 + nx);
  double middle = nx > 0.0 ? slope * x.dot(y - x) / nx : 0.0;
  return ny * std::log1p(ny) - nx * std::log1p(nx) - middle;
}

double logpower_bound(const Vec& x, const Vec& y) {
  return qpower_bound(x, y, 1.0, 0.5, ConvexityForm::log_weighted);
}

VerificationReport verify_strong_convexity(double q, double c, const SampleSpec& samples,
                                           std::span<const std::pair<Vec, Vec>> extra_pairs,
                                           std::size_t max_witnesses) {
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("q must exceed 1");
  if (!(c > 0.0)) throw InvalidArgument("c must be positive");
  ConvexityForm form = natural_form(q);
  return run_verification(
      q, c, form, samples, extra_pairs, max_witnesses,
      [q](const Vec& x, const Vec& y) { return qpower_gap(x, y, q); },
      [q, c, form](const Vec& x, const Vec& y) { return qpower_bound(x, y, q, c, form); },
      [q](const Vec& x, const Vec& y) {
        double nx = x.norm(), ny = y.norm();
        return std::pow(ny, q) + std::pow(nx, q) + q * std::pow(nx, q - 1.0) * (y - x).norm();
      });
}

VerificationReport verify_log_convexity(const SampleSpec& samples, std::size_t max_witnesses) {
  return run_verification(
      1.0, 0.5, ConvexityForm::log_weighted, samples, {}, max_witnesses,
      [](const Vec& x, const Vec& y) { return logpower_gap(x, y); },
      [](const Vec& x, const Vec& y) { return logpower_bound(x, y); },
      [](const Vec& x, const Vec& y) {
        double nx = x.norm(), ny = y.norm();
        return ny * std::log1p(ny) + nx * std::log1p(nx) + (1.0 + std::log1p(nx)) * (y - x).norm();
      });
}

QConvexityCertificate derive_c(double q, const SearchSpec& spec) {
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("q must exceed 1");
  return derive_c(q, natural_form(q), spec);
}

QConvexityCertificate derive_c(double q, ConvexityForm requested, const SearchSpec& spec) {
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("q must exceed 1");
  QConvexityCertificate cert;
  cert.q = q;
  cert.form = requested;

  if (requested == ConvexityForm::log_weighted)
    throw InvalidArgument("the log form has no exponent-dependent constant");

  if (requested == ConvexityForm::power_2_weighted) {
    if (q >= 2.0) throw InvalidArgument("weighted form is for 1 < q < 2");
    cert.c = 0.5 * q * (q - 1.0);
    SampleSpec evidence{10000, 0x5eed, 2.0, 1, 3};
    auto report = verify_strong_convexity(q, cert.c, evidence);
    cert.sample_count = report.samples;
    cert.worst_ratio = report.worst_ratio;
    return cert;
  }

  if (q < 2.0) throw InvalidArgument("power_q form requires q >= 2");

  const double pi = std::numbers::pi;
  if (q == 2.0) {
    // |y|^2 - |x|^2 - 2x.(y-x) = |y-x|^2 identically.
    cert.c = 1.0;
    cert.worst_ratio = 1.0;
    cert.sample_count = 1;
    return cert;
  }

  // Outside |x| <= s_max the second derivative bound gives ratio >= 1.
  double s_max = 1.0 + std::pow(2.0 / q, 1.0 / (q - 2.0));

  double best = normalized_gap(0.0, 0.0, q);
  double best_s = 0.0, best_t = 0.0;
  std::size_t evals = 1;

  auto scan = [&](double s_lo, double s_hi, double t_lo, double t_hi, int ns, int nt) {
    for (int i = 0; i < ns; ++i) {
      double s = s_lo + (s_hi - s_lo) * i / (ns - 1);
      for (int j = 0; j < nt; ++j) {
        double t = t_lo + (t_hi - t_lo) * j / (nt - 1);
        double g = normalized_gap(s, t, q);
        ++evals;
        if (g < best) {
          best = g;
          best_s = s;
          best_t = t;
        }
      }
    }
  };

  scan(0.0, s_max, 0.0, pi, spec.radial_points, spec.angular_points);
  double ds = s_max / (spec.radial_points - 1);
  double dt = pi / (spec.angular_points - 1);
  for (int level = 0; level < spec.refinements; ++level) {
    double s_lo = std::max(0.0, best_s - 2.0 * ds), s_hi = std::min(s_max, best_s + 2.0 * ds);
    double t_lo = std::max(0.0, best_t - 2.0 * dt), t_hi = std::min(pi, best_t + 2.0 * dt);
    scan(s_lo, s_hi, t_lo, t_hi, spec.refine_points, spec.refine_points);
    ds = (s_hi - s_lo) / (spec.refine_points - 1);
    dt = (t_hi - t_lo) / (spec.refine_points - 1);
  }

  cert.worst_ratio = best;
  cert.c = spec.safety * best;
  cert.sample_count = evals;
  cert.min_radius = best_s;
  cert.min_angle = best_t;
  return cert;
}

}  // namespace screener

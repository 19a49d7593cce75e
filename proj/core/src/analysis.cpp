#include "screener/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "screener/errors.hpp"
#include "screener/parallel.hpp"

namespace screener {

std::array<double, 3> fit_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2 || x.size() != y.size()) throw InvalidArgument("line fit needs two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("line fit needs distinct abscissae");
  double slope = sxy / sxx;
  double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {slope, my - slope * mx, r2};
}

// ---------------------------------------------------------------------------
// Holder exponent

HolderEstimate estimate_holder(const GridDomain& domain, const Mat& grad, double margin,
                               const HolderOptions& options) {
  domain.validate();
  if (grad.rows() != static_cast<Eigen::Index>(domain.size()))
    throw InvalidArgument("gradient field does not match the grid");
  if (!(margin >= 0.0)) throw InvalidArgument("margin must be non-negative");

  std::vector<std::size_t> inner;
  const double slack = 1e-9;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    Vec x = domain.point(k);
    bool inside = true;
    for (int a = 0; a < domain.dim; ++a) {
      double s = slack * domain.spacing(a);
      if (x[a] < domain.lower[a] + margin - s || x[a] > domain.upper[a] - margin + s) inside = false;
    }
    if (inside) inner.push_back(k);
  }
  if (inner.size() < 2) throw TooFewPairs("no interior nodes left after the margin");

  double hmin = domain.spacing(0);
  if (domain.dim == 2) hmin = std::min(hmin, domain.spacing(1));
  std::vector<Vec> pts(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) pts[i] = domain.point(inner[i]);
  double dmax = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) dmax = std::max(dmax, (pts[i] - pts[j]).norm());

  int bins = 0;
  while (hmin * std::ldexp(1.0, bins) <= dmax * (1.0 + 1e-12)) ++bins;
  HolderEstimate est;
  est.margin = margin;
  est.scales.resize(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) est.scales[static_cast<std::size_t>(k)].scale = hmin * std::ldexp(1.0, k);

  double variation = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double dist = (pts[i] - pts[j]).norm();
      double dg = (grad.row(static_cast<Eigen::Index>(inner[i])) -
                   grad.row(static_cast<Eigen::Index>(inner[j]))).norm();
      variation = std::max(variation, dg);
      // bin k holds (h 2^(k-1), h 2^k]
      int k = static_cast<int>(std::ceil(std::log2(dist / hmin) - 1e-12));
      k = std::max(k, 0);
      if (k >= bins) continue;
      auto& s = est.scales[static_cast<std::size_t>(k)];
      s.sup = std::max(s.sup, dg);
      ++s.pairs;
      ++est.pair_count;
    }
  }
  if (variation <= options.degenerate_tol) {
    est.degenerate = true;
    est.alpha = 1.0;
    est.slope = 1.0;
    est.r_squared = 1.0;
    return est;
  }
  std::vector<double> lx, ly;
  // the first bin holds nearest neighbours only, where centred differences blur
  for (std::size_t k = 1; k < est.scales.size(); ++k) {
    const auto& s = est.scales[k];
    if (s.pairs == 0 || s.sup <= 0.0) continue;
    lx.push_back(std::log(s.scale));
    ly.push_back(std::log(s.sup));
  }
  if (static_cast<int>(lx.size()) < options.min_scales)
    throw TooFewPairs("too few dyadic scales with gradient variation");
  auto [slope, intercept, r2] = fit_line(lx, ly);
  (void)intercept;
  est.slope = slope;
  est.r_squared = r2;
  est.alpha = std::clamp(slope, 1e-6, 1.0);
  return est;
}

HolderEstimate estimate_holder(const ConvexGrid& u, double margin, const HolderOptions& options) {
  return estimate_holder(u.domain(), gradient_field(u), margin, options);
}

// ---------------------------------------------------------------------------
// Growth of the support defect

std::size_t nearest_node(const GridDomain& domain, const Vec& x) {
  if (x.size() != domain.dim) throw InvalidArgument("point has the wrong dimension");
  std::array<int, 2> m{0, 0};
  for (int a = 0; a < domain.dim; ++a) {
    double t = std::round((x[a] - domain.lower[a]) / domain.spacing(a));
    m[a] = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(domain.nodes[a] - 1)));
  }
  return domain.index(m[0], m[1]);
}

Vec support_selection(const ConvexGrid& u, const PreferenceFunction& b, std::size_t node) {
  Mat g = gradient_field(u);
  Vec p = g.row(static_cast<Eigen::Index>(node)).transpose();
  Vec x = u.domain().point(node);
  if (auto y = b.exponential_closed_form(x, p)) return *y;
  return b_exponential(b, x, p);
}

GrowthFit growth_exponent(const ConvexGrid& u, const Vec& x0, std::span<const double> radii,
                          const PreferenceFunction& b, const Vec& y0) {
  const GridDomain& d = u.domain();
  if (radii.empty()) throw InvalidArgument("radius list is empty");
  std::size_t k0 = nearest_node(d, x0);
  GrowthFit fit;
  fit.x0 = d.point(k0);
  fit.y0 = y0;
  const double b0 = b.value(fit.x0, y0);
  const double u0 = u[k0];
  std::vector<Vec> pts = d.points();
  std::vector<double> defect(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) defect[k] = u[k] - (u0 + b.value(pts[k], y0) - b0);

  std::vector<double> lr, lh;
  for (double r : radii) {
    if (!(r > 0.0)) throw InvalidArgument("radii must be positive");
    GrowthRow row;
    row.r = r;
    row.h = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if ((pts[k] - fit.x0).norm() > r * (1.0 + 1e-12)) continue;
      if (defect[k] > row.h) {
        row.h = defect[k];
        row.node = k;
      }
    }
    fit.table.push_back(row);
    if (row.h > 0.0) {
      lr.push_back(std::log(r));
      lh.push_back(std::log(row.h));
    }
  }
  if (lr.size() < 2) throw AllZeroDefect("u coincides with its support near x0");
  auto [slope, intercept, r2] = fit_line(lr, lh);
  fit.slope = slope;
  fit.intercept = intercept;
  fit.r_squared = r2;
  return fit;
}

// ---------------------------------------------------------------------------
// Sections and comparisons

Section extract_section(const ConvexGrid& u, const PreferenceFunction& b, const BAffine& p) {
  const GridDomain& d = u.domain();
  Section s;
  s.comparison = p;
  for (std::size_t k = 0; k < d.size(); ++k) {
    double gap = p(b, d.point(k)) - u[k];
    if (gap > 0.0) {
      s.nodes.push_back(k);
      s.h = std::max(s.h, gap);
    }
  }
  s.measure = static_cast<double>(s.nodes.size()) * d.cell_volume();
  return s;
}

Comparison build_comparison(const ConvexGrid& u, const PreferenceFunction& b,
                            std::size_t base_node, double r, double epsilon) {
  const GridDomain& d = u.domain();
  if (base_node >= d.size()) throw InvalidArgument("base node out of range");
  if (!(r > 0.0)) throw InvalidArgument("radius must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");

  Comparison c;
  c.base_node = base_node;
  c.r = r;
  c.epsilon = epsilon;
  c.y0 = support_selection(u, b, base_node);
  std::vector<Vec> pts = d.points();
  NormalizedChart chart = normalize_coordinates(b, pts, u.values(), base_node, c.y0, {});

  c.h = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (chart.x_tilde[k].norm() > r * (1.0 + 1e-12)) continue;
    if (chart.u_tilde[k] > c.h) {
      c.h = chart.u_tilde[k];
      c.peak_node = k;
    }
  }
  double scale = 1.0;
  for (double v : u.values()) scale = std::max(scale, std::abs(v));
  if (!(c.h > 1e-12 * scale)) throw NonpositiveDefect("no positive defect on the ball");

  const Vec& xm = pts[c.peak_node];
  const Vec& xt = chart.x_tilde[c.peak_node];
  c.r_tilde = xt.norm();
  Vec e1 = xt / c.r_tilde;
  Vec target = b.grad_x(xm, c.y0) + b.cross_hessian(xm, c.y0) * (epsilon * c.h / c.r_tilde * e1);
  Vec y_eps;
  if (auto y = b.exponential_closed_form(xm, target)) {
    y_eps = *y;
  } else {
    y_eps = b_exponential(b, xm, target);
  }
  c.descriptor.y = y_eps;
  c.descriptor.a = u[c.peak_node] - b.value(xm, y_eps);
  c.value_at_base = c.descriptor(b, pts[base_node]) - u[base_node];
  return c;
}

// ---------------------------------------------------------------------------
// Minimality audit

AuditReport audit_minimality(const ConvexGrid& u, const Functional& model,
                             const PreferenceFunction& b, const AuditSpec& spec) {
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  if (!(spec.r_min > 0.0 && spec.r_max >= spec.r_min))
    throw InvalidArgument("audit radii must satisfy 0 < r_min <= r_max");
  const GridDomain& d = u.domain();
  AuditReport rep;
  rep.epsilon = spec.epsilon;
  rep.requested = spec.samples;
  rep.tol = spec.tol;

  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < d.size(); ++k) {
    Vec x = d.point(k);
    bool inside = true;
    for (int a = 0; a < d.dim; ++a) {
      if (x[a] < d.lower[a] + spec.margin - 1e-12 || x[a] > d.upper[a] - spec.margin + 1e-12)
        inside = false;
    }
    if (inside) candidates.push_back(k);
  }
  if (candidates.empty()) throw InvalidArgument("no nodes inside the audit margin");

  EnergyEvaluator energy(model, b, d);
  const double base_energy = energy.value(u.values());
  // F1-only evaluator for the section gap
  Functional f1_only = model;
  f1_only.f0 = [](const Vec&, double) { return 0.0; };
  EnergyEvaluator f1_energy(f1_only, b, d);
  const double base_f1 = f1_energy.value(u.values());

  rep.min_difference = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < spec.samples; ++s) {
    auto rng = stream_rng(spec.seed, s);
    std::size_t pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(candidates.size()));
    std::size_t node = candidates[std::min(pick, candidates.size() - 1)];
    double r = uniform(rng, spec.r_min, spec.r_max);

    Comparison c;
    try {
      c = build_comparison(u, b, node, r, spec.epsilon);
    } catch (const NonpositiveDefect&) {
      ++rep.skipped_nonpositive;
      continue;
    }
    SupResult sup = sup_b_affine(u, c.descriptor, b);
    if (sup.modified.empty()) {
      ++rep.skipped_empty;
      continue;
    }
    if (!is_feasible(sup.grid).feasible) {
      ++rep.skipped_infeasible;
      continue;
    }
    AuditSample a;
    a.node = node;
    a.r = r;
    a.h = c.h;
    a.section_size = sup.modified.size();
    a.section_measure = static_cast<double>(sup.modified.size()) * d.cell_volume();
    a.delta_energy = energy.value(sup.grid.values()) - base_energy;
    a.f1_gap = (f1_energy.value(sup.grid.values()) - base_f1) / a.section_measure;
    rep.min_difference = std::min(rep.min_difference, a.delta_energy);
    rep.samples.push_back(a);
  }
  rep.evaluated = rep.samples.size();
  if (rep.evaluated == 0) rep.min_difference = 0.0;
  rep.pass = rep.min_difference >= -spec.tol;

  if (rep.evaluated >= 3) {
    Mat design(static_cast<Eigen::Index>(rep.evaluated), 2);
    Vec rhs(static_cast<Eigen::Index>(rep.evaluated));
    for (std::size_t i = 0; i < rep.evaluated; ++i) {
      const auto& a = rep.samples[i];
      design(static_cast<Eigen::Index>(i), 0) = a.h;
      design(static_cast<Eigen::Index>(i), 1) = -std::pow(a.h / a.r, model.q);
      rhs[static_cast<Eigen::Index>(i)] = a.f1_gap;
    }
    Vec coef = design.colPivHouseholderQr().solve(rhs);
    if (coef.allFinite()) {
      rep.c1 = coef[0];
      rep.c2 = coef[1];
      rep.fit_ok = true;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Ruled regions

RuledQuery ruled_query(const Functional& model, const GridDomain& domain, double tolerance) {
  if (!model.source) throw InvalidArgument("model has no linear source term");
  RuledQuery q;
  q.tolerance = tolerance;
  q.f.resize(domain.size());
  for (std::size_t k = 0; k < domain.size(); ++k) q.f[k] = model.source(domain.point(k));
  return q;
}

RuledRegionReport detect_ruled(const ConvexGrid& u, const RuledQuery& query) {
  const GridDomain& d = u.domain();
  if (query.f.size() != d.size()) throw InvalidArgument("query field does not match the grid");
  for (double v : query.f) {
    if (!std::isfinite(v)) throw InvalidArgument("query field must be finite");
  }
  RuledRegionReport rep;
  rep.measure = d.dim == 1 ? "second_difference" : "hessian_determinant";
  rep.worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (query.f[k] > query.threshold || d.on_boundary(k)) continue;
    auto m = d.multi_index(k);
    double value;
    if (d.dim == 1) {
      value = u[k - 1] - 2.0 * u[k] + u[k + 1];
    } else {
      auto at = [&](int di, int dj) { return u[d.index(m[0] + di, m[1] + dj)]; };
      double uxx = at(1, 0) - 2.0 * at(0, 0) + at(-1, 0);
      double uyy = at(0, 1) - 2.0 * at(0, 0) + at(0, -1);
      double uxy = 0.25 * (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1));
      value = uxx * uyy - uxy * uxy;
    }
    ++rep.region_size;
    if (value > rep.worst) {
      rep.worst = value;
      rep.worst_node = k;
    }
  }
  rep.vacuous = rep.region_size == 0;
  if (rep.vacuous) rep.worst = 0.0;
  rep.consistent = rep.worst <= query.tolerance;
  return rep;
}

}  // namespace screener

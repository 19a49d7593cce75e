#include "screener/convexgrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "screener/errors.hpp"

namespace screener {

// ---------------------------------------------------------------------------
// GridDomain

GridDomain GridDomain::line(double lo, double hi, int n) {
  GridDomain d;
  d.dim = 1;
  d.lower = {lo, 0.0};
  d.upper = {hi, 0.0};
  d.nodes = {n, 1};
  d.validate();
  return d;
}

GridDomain GridDomain::rectangle(double lo0, double hi0, int n0, double lo1, double hi1,
                                 int n1) {
  GridDomain d;
  d.dim = 2;
  d.lower = {lo0, lo1};
  d.upper = {hi0, hi1};
  d.nodes = {n0, n1};
  d.validate();
  return d;
}

void GridDomain::validate() const {
  if (dim != 1 && dim != 2) throw InvalidArgument("grid dimension must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (!(upper[a] > lower[a]) || !std::isfinite(lower[a]) || !std::isfinite(upper[a]))
      throw InvalidArgument("grid bounds must be finite and increasing");
    if (nodes[a] < 3) throw InvalidArgument("grid needs at least 3 nodes per axis");
  }
}

double GridDomain::spacing(int axis) const {
  return (upper[axis] - lower[axis]) / (nodes[axis] - 1);
}

std::size_t GridDomain::size() const {
  return dim == 1 ? static_cast<std::size_t>(nodes[0])
                  : static_cast<std::size_t>(nodes[0]) * static_cast<std::size_t>(nodes[1]);
}

std::size_t GridDomain::index(int i, int j) const {
  return dim == 1 ? static_cast<std::size_t>(i)
                  : static_cast<std::size_t>(i) * static_cast<std::size_t>(nodes[1]) +
                        static_cast<std::size_t>(j);
}

std::array<int, 2> GridDomain::multi_index(std::size_t k) const {
  if (dim == 1) return {static_cast<int>(k), 0};
  return {static_cast<int>(k / static_cast<std::size_t>(nodes[1])),
          static_cast<int>(k % static_cast<std::size_t>(nodes[1]))};
}

Vec GridDomain::point(std::size_t k) const {
  auto m = multi_index(k);
  Vec p(dim);
  for (int a = 0; a < dim; ++a) {
    // exact endpoints regardless of rounding in the spacing
    p[a] = m[a] == nodes[a] - 1 ? upper[a] : lower[a] + m[a] * spacing(a);
  }
  return p;
}

std::vector<Vec> GridDomain::points() const {
  std::vector<Vec> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = point(k);
  return out;
}

bool GridDomain::on_boundary(std::size_t k) const {
  auto m = multi_index(k);
  for (int a = 0; a < dim; ++a) {
    if (m[a] == 0 || m[a] == nodes[a] - 1) return true;
  }
  return false;
}

std::vector<double> GridDomain::weights() const {
  std::vector<double> w(size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    auto m = multi_index(k);
    double v = 1.0;
    for (int a = 0; a < dim; ++a) {
      double h = spacing(a);
      v *= (m[a] == 0 || m[a] == nodes[a] - 1) ? 0.5 * h : h;
    }
    w[k] = v;
  }
  return w;
}

double GridDomain::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing(a);
  return v;
}

Box GridDomain::box() const {
  Box b{Vec(dim), Vec(dim)};
  for (int a = 0; a < dim; ++a) {
    b.lower[a] = lower[a];
    b.upper[a] = upper[a];
  }
  return b;
}

Stencil default_stencil(int dim, bool wide) {
  if (dim == 1) return {{1, 0}};
  Stencil s{{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  if (wide) s.insert(s.end(), {{2, 1}, {1, 2}, {2, -1}, {1, -2}});
  return s;
}

const char* to_string(BoundaryMode mode) {
  switch (mode) {
    case BoundaryMode::free: return "free";
    case BoundaryMode::participation: return "participation";
    case BoundaryMode::pinned: return "pinned";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// ConstraintSet

ConstraintSet ConstraintSet::convex_only(const GridDomain& domain) {
  domain.validate();
  ConstraintSet c;
  c.stencil = default_stencil(domain.dim);
  return c;
}

ConstraintSet ConstraintSet::participation(const GridDomain& domain, const PreferenceFunction& b,
                                           double a0, const Vec& y0) {
  ConstraintSet c = convex_only(domain);
  if (y0.size() != domain.dim) throw InvalidArgument("y0 has the wrong dimension");
  if (!b.y_domain().contains(y0, 1e-12)) throw InvalidArgument("y0 must lie in the closure of Y");
  c.mode = BoundaryMode::participation;
  c.lower_bound.resize(domain.size());
  for (std::size_t k = 0; k < domain.size(); ++k) c.lower_bound[k] = a0 + b.value(domain.point(k), y0);
  c.adapt_to(domain, b);
  return c;
}

ConstraintSet ConstraintSet::pinned(const GridDomain& domain, double value) {
  ConstraintSet c = convex_only(domain);
  c.mode = BoundaryMode::pinned;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    if (domain.on_boundary(k)) {
      c.pinned_nodes.push_back(k);
      c.pinned_values.push_back(value);
    }
  }
  return c;
}

void ConstraintSet::adapt_to(const GridDomain& domain, const PreferenceFunction& b) {
  shift.clear();
  std::vector<double> s(domain.size());
  bool nonzero = false;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    auto phi = b.convexifying_potential(domain.point(k));
    if (!phi) return;
    s[k] = *phi;
    nonzero = nonzero || s[k] != 0.0;
  }
  if (nonzero) shift = std::move(s);
}

ConvexGrid::ConvexGrid(GridDomain domain, std::vector<double> values, ConstraintSet constraint)
    : domain_(std::move(domain)), values_(std::move(values)), constraint_(std::move(constraint)) {
  domain_.validate();
  if (values_.size() != domain_.size()) throw InvalidArgument("values do not match the grid");
}

double feasibility_tolerance(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return 1e-8 * (1.0 + m);
}

// ---------------------------------------------------------------------------
// Second-difference enumeration shared by the projector and the checker.

namespace {

template <class Fn>
void for_each_second_difference(const GridDomain& domain, const Stencil& stencil, Fn fn) {
  for (std::size_t k = 0; k < domain.size(); ++k) {
    auto m = domain.multi_index(k);
    for (const auto& d : stencil) {
      int dj = domain.dim == 1 ? 0 : d[1];
      int i0 = m[0] - d[0], i1 = m[0] + d[0];
      int j0 = m[1] - dj, j1 = m[1] + dj;
      if (i0 < 0 || i1 >= domain.nodes[0]) continue;
      if (domain.dim == 2 && (std::min(j0, j1) < 0 || std::max(j0, j1) >= domain.nodes[1]))
        continue;
      std::size_t lo = domain.index(i0, j0);
      std::size_t hi = domain.index(i1, j1);
      double len2 = 0.0;
      len2 += std::pow(d[0] * domain.spacing(0), 2);
      if (domain.dim == 2) len2 += std::pow(dj * domain.spacing(1), 2);
      fn(lo, k, hi, len2);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Projection

ConvexProjector::ConvexProjector(const GridDomain& domain, const ConstraintSet& constraint,
                                 ProjectionOptions options)
    : n_(domain.size()), options_(options) {
  domain.validate();
  if (constraint.stencil.empty()) throw InvalidArgument("constraint set has an empty stencil");
  if (!constraint.lower_bound.empty() && constraint.lower_bound.size() != n_)
    throw InvalidArgument("lower bound does not match the grid");
  if (!constraint.shift.empty() && constraint.shift.size() != n_)
    throw InvalidArgument("convexity shift does not match the grid");

  std::vector<char> is_pinned(n_, 0);
  std::vector<double> pin_value(n_, 0.0);
  for (std::size_t t = 0; t < constraint.pinned_nodes.size(); ++t) {
    is_pinned[constraint.pinned_nodes[t]] = 1;
    pin_value[constraint.pinned_nodes[t]] = constraint.pinned_values[t];
  }
  pinned_ = constraint.pinned_nodes;
  pinned_values_ = constraint.pinned_values;

  auto shift = [&](std::size_t k) { return constraint.shift.empty() ? 0.0 : constraint.shift[k]; };

  for_each_second_difference(domain, constraint.stencil,
                             [&](std::size_t lo, std::size_t mid, std::size_t hi, double) {
    // v_lo - 2 v_mid + v_hi >= -(s_lo - 2 s_mid + s_hi)
    Row r;
    r.rhs = -(shift(lo) - 2.0 * shift(mid) + shift(hi));
    const std::array<std::size_t, 3> idx{lo, mid, hi};
    const std::array<double, 3> coef{1.0, -2.0, 1.0};
    double norm2 = 0.0;
    for (int t = 0; t < 3; ++t) {
      if (is_pinned[idx[t]]) {
        r.rhs -= coef[t] * pin_value[idx[t]];
      } else {
        r.idx[r.len] = idx[t];
        r.coef[r.len] = coef[t];
        ++r.len;
        norm2 += coef[t] * coef[t];
      }
    }
    if (r.len == 0) return;  // fixed by the pinned data alone
    r.inv_norm2 = 1.0 / norm2;
    rows_.push_back(r);
  });

  if (!constraint.lower_bound.empty()) {
    for (std::size_t k = 0; k < n_; ++k) {
      if (is_pinned[k]) continue;
      Row r;
      r.idx[0] = k;
      r.coef[0] = 1.0;
      r.len = 1;
      r.rhs = constraint.lower_bound[k];
      r.inv_norm2 = 1.0;
      rows_.push_back(r);
    }
  }
  mu_.assign(rows_.size(), 0.0);
}

void ConvexProjector::reset() { std::fill(mu_.begin(), mu_.end(), 0.0); }

namespace {

void check_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument("projection input has non-finite entries");
  }
}

}  // namespace

ProjectionResult ConvexProjector::project(std::span<const double> v0, bool warm_start) {
  if (v0.size() != n_) throw InvalidArgument("vector does not match the grid");
  if (!warm_start) reset();
  std::vector<double> v(v0.begin(), v0.end());
  return run(std::move(v), v0);
}

ProjectionResult ConvexProjector::project(std::span<const double> v0,
                                          std::span<const double> multipliers) {
  if (v0.size() != n_) throw InvalidArgument("vector does not match the grid");
  if (multipliers.size() != rows_.size())
    throw InvalidArgument("multiplier count does not match the constraint rows");
  for (std::size_t r = 0; r < rows_.size(); ++r) mu_[r] = std::max(0.0, multipliers[r]);
  std::vector<double> v(v0.begin(), v0.end());
  return run(std::move(v), v0);
}

ProjectionResult ConvexProjector::run(std::vector<double> v, std::span<const double> v0) {
  check_finite(v0);
  for (std::size_t t = 0; t < pinned_.size(); ++t) v[pinned_[t]] = pinned_values_[t];
  // the iterate is v0 + sum mu_r a_r
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (mu_[r] == 0.0) continue;
    const Row& row = rows_[r];
    for (int t = 0; t < row.len; ++t) v[row.idx[t]] += mu_[r] * row.coef[t];
  }

  ProjectionResult res;
  const double omega = options_.relaxation;
  if (!(omega > 0.0 && omega < 2.0)) throw InvalidArgument("relaxation must lie in (0, 2)");
  const double feas_tol = feasibility_tolerance(v0);
  for (std::size_t sweep = 1; sweep <= options_.max_sweeps; ++sweep) {
    double change = 0.0;
    double violation = 0.0;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Row& row = rows_[r];
      double av = 0.0;
      for (int t = 0; t < row.len; ++t) av += row.coef[t] * v[row.idx[t]];
      violation = std::max(violation, row.rhs - av);
      // Dykstra step on {a.v >= rhs}: undo the stored correction, project, store the new one.
      double mu_new = std::max(0.0, mu_[r] + omega * (row.rhs - av) * row.inv_norm2);
      double delta = mu_new - mu_[r];
      if (delta == 0.0) continue;
      mu_[r] = mu_new;
      for (int t = 0; t < row.len; ++t) v[row.idx[t]] += delta * row.coef[t];
      change = std::max(change, std::abs(delta) * (row.len == 1 ? 1.0 : 2.0));
    }
    res.sweeps = sweep;
    res.last_change = change;
    res.max_violation = violation;
    if (change <= options_.tol && violation <= feas_tol) {
      res.values = std::move(v);
      return res;
    }
  }
  throw MaxSweepsExceeded("projection did not converge within the sweep budget",
                          res.max_violation);
}

Eigen::SparseMatrix<double> ConvexProjector::constraint_matrix() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(rows_.size() * 3);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (int t = 0; t < rows_[r].len; ++t) {
      trips.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(rows_[r].idx[t]),
                         rows_[r].coef[t]);
    }
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(rows_.size()),
                                static_cast<Eigen::Index>(n_));
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

std::vector<double> ConvexProjector::constraint_rhs() const {
  std::vector<double> c(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) c[r] = rows_[r].rhs;
  return c;
}

ConvexGrid project_convex(std::span<const double> v, const GridDomain& domain,
                          const ConstraintSet& constraint, ProjectionOptions options) {
  ConvexProjector projector(domain, constraint, options);
  auto res = projector.project(v);
  return ConvexGrid(domain, std::move(res.values), constraint);
}

FeasibilityReport is_feasible(const ConvexGrid& u, double tol) {
  const auto& v = u.values();
  const auto& c = u.constraint();
  const auto& domain = u.domain();
  if (tol < 0.0) tol = feasibility_tolerance(v);
  FeasibilityReport rep;
  auto consider = [&](double residual, double scaled, std::size_t node, const char* family) {
    if (residual < rep.worst) {
      rep.worst = residual;
      rep.worst_scaled = scaled;
      rep.node = node;
      rep.family = family;
    }
  };
  auto shift = [&](std::size_t k) { return c.shift.empty() ? 0.0 : c.shift[k]; };
  for_each_second_difference(domain, c.stencil,
                             [&](std::size_t lo, std::size_t mid, std::size_t hi, double len2) {
    double r = (v[lo] + shift(lo)) - 2.0 * (v[mid] + shift(mid)) + (v[hi] + shift(hi));
    consider(r, r / len2, mid, "convexity");
  });
  if (!c.lower_bound.empty()) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      double r = v[k] - c.lower_bound[k];
      consider(r, r, k, "lower_bound");
    }
  }
  for (std::size_t t = 0; t < c.pinned_nodes.size(); ++t) {
    double r = -std::abs(v[c.pinned_nodes[t]] - c.pinned_values[t]);
    consider(r, r, c.pinned_nodes[t], "pinned");
  }
  rep.feasible = rep.worst >= -tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Gradients

std::vector<Eigen::SparseMatrix<double>> gradient_operators(const GridDomain& domain) {
  domain.validate();
  const auto n = static_cast<Eigen::Index>(domain.size());
  std::vector<Eigen::SparseMatrix<double>> ops;
  for (int axis = 0; axis < domain.dim; ++axis) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(domain.size() * 3);
    const double inv2h = 1.0 / (2.0 * domain.spacing(axis));
    const int last = domain.nodes[axis] - 1;
    for (std::size_t k = 0; k < domain.size(); ++k) {
      auto m = domain.multi_index(k);
      auto at = [&](int offset) {
        auto mm = m;
        mm[axis] += offset;
        return static_cast<Eigen::Index>(domain.index(mm[0], mm[1]));
      };
      const auto row = static_cast<Eigen::Index>(k);
      if (m[axis] == 0) {
        trips.emplace_back(row, at(0), -3.0 * inv2h);
        trips.emplace_back(row, at(1), 4.0 * inv2h);
        trips.emplace_back(row, at(2), -1.0 * inv2h);
      } else if (m[axis] == last) {
        trips.emplace_back(row, at(0), 3.0 * inv2h);
        trips.emplace_back(row, at(-1), -4.0 * inv2h);
        trips.emplace_back(row, at(-2), 1.0 * inv2h);
      } else {
        trips.emplace_back(row, at(1), inv2h);
        trips.emplace_back(row, at(-1), -inv2h);
      }
    }
    Eigen::SparseMatrix<double> op(n, n);
    op.setFromTriplets(trips.begin(), trips.end());
    ops.push_back(std::move(op));
  }
  return ops;
}

Mat gradient_field(const GridDomain& domain, std::span<const double> values) {
  if (values.size() != domain.size()) throw InvalidArgument("values do not match the grid");
  Eigen::Map<const Vec> v(values.data(), static_cast<Eigen::Index>(values.size()));
  auto ops = gradient_operators(domain);
  Mat g(static_cast<Eigen::Index>(values.size()), domain.dim);
  for (int a = 0; a < domain.dim; ++a) g.col(a) = ops[a] * v;
  return g;
}

Mat gradient_field(const ConvexGrid& u) { return gradient_field(u.domain(), u.values()); }

SupResult sup_b_affine(const ConvexGrid& u, const BAffine& p, const PreferenceFunction& b) {
  std::vector<double> v = u.values();
  std::vector<std::size_t> modified;
  for (std::size_t k = 0; k < v.size(); ++k) {
    double pk = p(b, u.domain().point(k));
    if (pk > v[k]) {
      v[k] = pk;
      modified.push_back(k);
    }
  }
  return SupResult{ConvexGrid(u.domain(), std::move(v), u.constraint()), std::move(modified)};
}

}  // namespace screener

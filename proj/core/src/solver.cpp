#include "screener/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "screener/parallel.hpp"

namespace screener {

const char* to_string(SolverMethod method) {
  return method == SolverMethod::admm ? "admm" : "projected_gradient";
}

const char* to_string(StepRule rule) {
  switch (rule) {
    case StepRule::fixed: return "fixed";
    case StepRule::diminishing: return "diminishing";
    case StepRule::backtracking: return "backtracking";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
  if (!(stationarity_tol > 0.0)) throw InvalidArgument("stationarity_tol must be positive");
  if (!(energy_tol >= 0.0)) throw InvalidArgument("energy_tol must be non-negative");
  if (!(step_size >= 0.0)) throw InvalidArgument("step_size must be non-negative");
  if (!(armijo > 0.0 && armijo < 1.0)) throw InvalidArgument("armijo must lie in (0, 1)");
  if (!(rho >= 0.0)) throw InvalidArgument("rho must be non-negative");
  if (check_every < 1) throw InvalidArgument("check_every must be at least 1");
  if (!(init_quadratic >= 0.0) || !(init_noise >= 0.0))
    throw InvalidArgument("initialization amplitudes must be non-negative");
  if (!(projection.tol > 0.0)) throw InvalidArgument("projection tolerance must be positive");
}

std::vector<double> initial_iterate(const GridDomain& domain, const ConstraintSet& constraint,
                                    const SolverConfig& config) {
  const std::size_t n = domain.size();
  std::vector<double> v(n, 0.0);
  if (!constraint.lower_bound.empty()) v = constraint.lower_bound;
  double pin = 0.0;
  if (!constraint.pinned_values.empty()) pin = constraint.pinned_values.front();

  Vec center(domain.dim);
  double radius2 = 0.0;
  for (int a = 0; a < domain.dim; ++a) {
    center[a] = 0.5 * (domain.lower[a] + domain.upper[a]);
    radius2 += std::pow(0.5 * (domain.upper[a] - domain.lower[a]), 2);
  }
  for (std::size_t k = 0; k < n; ++k) {
    double q = (domain.point(k) - center).squaredNorm();
    if (constraint.mode == BoundaryMode::pinned) {
      v[k] = pin + config.init_quadratic * (q - radius2);
    } else {
      v[k] += config.init_quadratic * q;
    }
    if (config.init_noise > 0.0) {
      auto rng = stream_rng(config.seed, k);
      v[k] += uniform(rng, -config.init_noise, config.init_noise);
    }
  }
  ConvexProjector projector(domain, constraint, config.projection);
  return projector.project(v).values;
}

double stationarity(ConvexProjector& projector, std::span<const double> u, const Vec& grad,
                    std::span<const double> multipliers) {
  std::vector<double> v(u.begin(), u.end());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] -= grad[static_cast<Eigen::Index>(k)];
  ProjectionResult p = multipliers.empty() ? projector.project(v)
                                           : projector.project(v, multipliers);
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s = std::max(s, std::abs(u[k] - p.values[k]));
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;
using SpMat = Eigen::SparseMatrix<double>;

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

constexpr double kPolishTrigger = 1e-3;
constexpr int kPolishPasses = 50;

std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

struct Tracker {
  const GridDomain& domain;
  const ConstraintSet& constraint;
  std::shared_ptr<SolveResult> best;

  void offer(const Vec& z, double energy, double stat, SolveReport report) {
    if (best && best->report.stationarity <= stat) return;
    std::vector<double> values(z.data(), z.data() + z.size());
    report.energy = energy;
    report.stationarity = stat;
    best = std::make_shared<SolveResult>(
        SolveResult{ConvexGrid(domain, std::move(values), constraint), report});
  }
};

// Newton on the energy restricted to {A_r u = c_r} for the given rows. The
// KKT system is regularized to stay quasi-definite when rows are dependent;
// the proximal multiplier term keeps the constraints exact at convergence.
bool solve_on_rows(const EnergyEvaluator& energy, const SpMat& p, const SpMat& apr, const Vec& c,
                   const std::vector<Eigen::Index>& rows, Vec& u, Vec& mu) {
  const Eigen::Index nf = p.cols();
  const auto ma = static_cast<Eigen::Index>(rows.size());
  std::vector<Eigen::Triplet<double>> at;
  for (Eigen::Index i = 0; i < ma; ++i) {
    for (SpMat::InnerIterator itr(apr, rows[static_cast<std::size_t>(i)]); itr; ++itr)
      at.emplace_back(i, itr.row(), itr.value());
  }
  SpMat act(ma, nf);
  act.setFromTriplets(at.begin(), at.end());
  Vec cr(ma);
  for (Eigen::Index i = 0; i < ma; ++i) cr[i] = c[rows[static_cast<std::size_t>(i)]];

  Eigen::SimplicialLDLT<SpMat> ldlt;
  mu = Vec::Zero(ma);
  for (int iter = 0; iter < 40; ++iter) {
    Vec ge;
    energy.value_and_gradient(as_span(u), ge);
    Vec g = p.transpose() * ge;
    SpMat h = SpMat(p.transpose() * energy.hessian(as_span(u)) * p);
    double scale = 0.0;
    for (Eigen::Index k = 0; k < nf; ++k) scale = std::max(scale, std::abs(h.coeff(k, k)));
    const double reg = 1e-10 * std::max(1.0, scale);
    Vec r = cr - act * (p.transpose() * u);

    std::vector<Eigen::Triplet<double>> kt;
    for (Eigen::Index k = 0; k < h.outerSize(); ++k)
      for (SpMat::InnerIterator itr(h, k); itr; ++itr) kt.emplace_back(itr.row(), itr.col(), itr.value());
    for (Eigen::Index k = 0; k < nf; ++k) kt.emplace_back(k, k, reg);
    for (Eigen::Index k = 0; k < act.outerSize(); ++k) {
      for (SpMat::InnerIterator itr(act, k); itr; ++itr) {
        kt.emplace_back(nf + itr.row(), itr.col(), itr.value());
        kt.emplace_back(itr.col(), nf + itr.row(), itr.value());
      }
    }
    for (Eigen::Index i = 0; i < ma; ++i) kt.emplace_back(nf + i, nf + i, -reg);
    SpMat kkt(nf + ma, nf + ma);
    kkt.setFromTriplets(kt.begin(), kt.end());
    ldlt.compute(kkt);
    if (ldlt.info() != Eigen::Success) return false;
    Vec rhs(nf + ma);
    rhs << -g, r - reg * mu;
    Vec sol = ldlt.solve(rhs);
    if (!sol.allFinite()) return false;
    Vec du = sol.head(nf);
    double dmu = inf_norm(sol.tail(ma) - mu);
    mu = sol.tail(ma);
    u += p * du;
    if (inf_norm(du) <= 1e-13 * (1.0 + inf_norm(u)) && dmu <= 1e-9 * (1.0 + inf_norm(mu))) return true;
  }
  return false;
}

// Active-set passes seeded with the rows ADMM holds at the bound. Violated rows
// join first; once the point is feasible, rows with negative multipliers leave.
bool polish_active(const EnergyEvaluator& energy, const SpMat& p, const SpMat& a, const Vec& c,
                   std::vector<Eigen::Index> rows, Vec& u, std::vector<double>& lambda) {
  const SpMat apr = SpMat(SpMat(a * p).transpose());
  const Vec start = u;
  const double tol = 1e-12 * (1.0 + inf_norm(c));
  for (int pass = 0; pass < kPolishPasses; ++pass) {
    u = start;
    Vec mu;
    if (!solve_on_rows(energy, p, apr, c, rows, u, mu)) return false;
    std::vector<char> in(static_cast<std::size_t>(a.rows()), 0);
    for (auto r : rows) in[static_cast<std::size_t>(r)] = 1;
    std::vector<Eigen::Index> next = rows;
    Vec au = a * u;
    std::size_t added = 0, removed = 0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      if (!in[static_cast<std::size_t>(r)] && au[r] < c[r] - tol) {
        next.push_back(r);
        ++added;
      }
    }
    if (added == 0) {
      next.clear();
      const double mtol = 1e-12 * (1.0 + inf_norm(mu));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (mu[static_cast<Eigen::Index>(i)] > mtol) {
          ++removed;
        } else {
          next.push_back(rows[i]);
        }
      }
    }
    if (added == 0 && removed == 0) {
      std::fill(lambda.begin(), lambda.end(), 0.0);
      for (std::size_t i = 0; i < rows.size(); ++i)
        lambda[static_cast<std::size_t>(rows[i])] = std::max(0.0, -mu[static_cast<Eigen::Index>(i)]);
      return true;
    }
    std::sort(next.begin(), next.end());
    rows = std::move(next);
  }
  return false;
}

SolveResult finish(const GridDomain& domain, const ConstraintSet& constraint, const Vec& z,
                   SolveReport report, Clock::time_point start) {
  std::vector<double> values(z.data(), z.data() + z.size());
  ConvexGrid grid(domain, std::move(values), constraint);
  report.feasibility = is_feasible(grid).worst;
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return SolveResult{std::move(grid), std::move(report)};
}

[[noreturn]] void fail(Tracker& tracker, SolveReport report, const Vec& fallback, double energy,
                       Clock::time_point start) {
  if (!tracker.best) tracker.offer(fallback, energy, std::numeric_limits<double>::infinity(), report);
  auto best = std::make_shared<SolveResult>(*tracker.best);
  best->report.iterations = report.iterations;
  best->report.energy_trace = report.energy_trace;
  best->report.status = "incomplete";
  best->report.feasibility = is_feasible(best->solution).worst;
  best->report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  throw MaxIterations("solver reached the iteration limit", best);
}

// ---------------------------------------------------------------------------

SolveResult solve_admm(const EnergyEvaluator& energy, const GridDomain& domain,
                       const ConstraintSet& constraint, const SolverConfig& config,
                       SolveReport report, Clock::time_point start) {
  const auto n = static_cast<Eigen::Index>(domain.size());
  ConvexProjector projector(domain, constraint, config.projection);
  const SpMat a = projector.constraint_matrix();
  const std::vector<double> rhs = projector.constraint_rhs();
  const Eigen::Map<const Vec> c(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  const auto m = a.rows();

  // Free-node selection; pinned values stay fixed in u.
  std::vector<char> pinned(static_cast<std::size_t>(n), 0);
  for (auto k : projector.pinned_nodes()) pinned[k] = 1;
  std::vector<Eigen::Triplet<double>> sel;
  Eigen::Index nf = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!pinned[static_cast<std::size_t>(k)]) sel.emplace_back(k, nf++, 1.0);
  }
  SpMat p(n, nf);
  p.setFromTriplets(sel.begin(), sel.end());
  const SpMat ap = a * p;
  const SpMat ata = SpMat(ap.transpose() * ap);
  SpMat reg(nf, nf);
  reg.setIdentity();

  std::vector<double> init = initial_iterate(domain, constraint, config);
  Vec u = Eigen::Map<const Vec>(init.data(), n);
  Vec s = a * u;
  Vec w = Vec::Zero(m);

  double rho = config.rho;
  if (rho == 0.0) {
    SpMat h = energy.hessian(as_span(u));
    double hd = 0.0, ad = 0.0;
    SpMat hf = p.transpose() * h * p;
    for (Eigen::Index k = 0; k < nf; ++k) {
      hd += hf.coeff(k, k);
      ad += ata.coeff(k, k);
    }
    rho = hd > 0.0 && ad > 0.0 ? hd / ad : 1.0;
  }

  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool analyzed = false;
  bool stale = true;
  double factor_rho = 0.0;
  const double relax = 1.6;
  Tracker tracker{domain, constraint, nullptr};
  Vec z = u;
  double z_energy = energy.value(as_span(z));
  double last_checked_energy = std::numeric_limits<double>::quiet_NaN();
  report.energy_trace.push_back(z_energy);

  auto augmented = [&](const Vec& uu, Vec* grad) {
    Vec r = a * uu - s + w;
    double e;
    if (grad) {
      Vec ge;
      e = energy.value_and_gradient(as_span(uu), ge);
      *grad = p.transpose() * (ge + rho * (a.transpose() * r));
    } else {
      e = energy.value(as_span(uu));
    }
    return e + 0.5 * rho * r.squaredNorm();
  };

  // Projects a candidate, records it, and reports whether it is stationary.
  // Only iterates of the main sequence enter the trace unless they converge.
  std::vector<Eigen::Index> polished_rows;
  auto certify = [&](const Vec& candidate, const std::vector<double>& lambda, bool traced) {
    try {
      ProjectionResult pz = projector.project(as_span(candidate));
      Vec zc = Eigen::Map<const Vec>(pz.values.data(), n);
      Vec gz;
      double ez = energy.value_and_gradient(as_span(zc), gz);
      double stat = stationarity(projector, as_span(zc), gz, lambda);
      tracker.offer(zc, ez, stat, report);
      bool energy_done = traced && config.energy_tol > 0.0 && std::isfinite(last_checked_energy) &&
                         std::abs(ez - last_checked_energy) <= config.energy_tol * (1.0 + std::abs(ez));
      bool done = stat <= config.stationarity_tol || energy_done;
      if (traced) last_checked_energy = ez;
      if (traced || done) {
        z = zc;
        z_energy = ez;
        report.energy_trace.push_back(ez);
      }
      if (done) {
        report.status = "converged";
        report.energy = ez;
        report.stationarity = stat;
      }
      return done;
    } catch (const MaxSweepsExceeded&) {
      // projection budget exhausted at this check; keep iterating
      return false;
    }
  };

  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    report.iterations = it;
    // u-update: damped Newton on E(u) + rho/2 |A u - s + w|^2. The factorization
    // is reused while the quadratic model stays exact and rho is unchanged.
    for (int newton = 0; newton < 8; ++newton) {
      Vec g;
      double j0 = augmented(u, &g);
      if (inf_norm(g) <= 1e-13 * (1.0 + std::abs(j0))) break;
      if (stale || factor_rho != rho) {
        SpMat k = SpMat(p.transpose() * energy.hessian(as_span(u)) * p) + rho * ata +
                  (1e-12 * rho) * reg;
        if (!analyzed) {
          ldlt.analyzePattern(k);
          analyzed = true;
        }
        ldlt.factorize(k);
        if (ldlt.info() != Eigen::Success)
          throw NoConvergence("Newton system factorization failed");
        factor_rho = rho;
        stale = false;
      }
      Vec d = -ldlt.solve(g);
      double slope = g.dot(d);
      if (-slope <= 1e-12 * (1.0 + std::abs(j0))) {
        // J cannot resolve the decrease; take the full step on the model
        u += p * d;
        break;
      }
      if (!(slope < 0.0)) {
        stale = true;
        continue;
      }
      double t = 1.0;
      double j1 = j0;
      Vec trial;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls) {
        trial = u + t * (p * d);
        j1 = augmented(trial, nullptr);
        if (j1 <= j0 + 1e-4 * t * slope + 1e-15 * std::abs(j0)) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) {
        stale = true;
        break;
      }
      u = trial;
      // an exact quadratic model predicts j0 + slope / 2 for the full step
      bool exact = t == 1.0 && std::abs(j1 - (j0 + 0.5 * slope)) <=
                                   1e-6 * std::abs(slope) + 1e-14 * std::abs(j0);
      if (exact) break;
      stale = true;
      if (t * inf_norm(d) <= 1e-15 * (1.0 + inf_norm(u))) break;
    }

    Vec au_raw = a * u;
    Vec s_old = s;
    Vec au = relax * au_raw + (1.0 - relax) * s_old;
    s = (au + w).cwiseMax(c);
    w += au - s;
    // After this update grad E(u) = -rho A^T w with w <= 0 and w_r < 0 only on
    // rows with s_r = c_r, so the primal and dual residuals carry the whole
    // KKT error.
    double primal = inf_norm(au_raw - s);
    double dual = rho * inf_norm(a.transpose() * (s - s_old));
    bool settled = primal <= config.stationarity_tol && dual <= config.stationarity_tol;

    if ((settled && it % config.check_every == 0) || it == config.max_iterations) {
      std::vector<double> lambda(static_cast<std::size_t>(m));
      for (Eigen::Index r = 0; r < m; ++r)
        lambda[static_cast<std::size_t>(r)] = std::max(0.0, -rho * w[r]);
      report.rho = rho;
      if (certify(u, lambda, true)) return finish(domain, constraint, z, report, start);
    } else if (it % config.check_every == 0 && std::max(primal, dual) <= kPolishTrigger) {
      // ADMM has a slow tail on heavily constrained problems; once the active
      // rows look stable, solve for them directly and certify the result.
      std::vector<Eigen::Index> rows;
      for (Eigen::Index r = 0; r < m; ++r)
        if (s[r] <= c[r] && w[r] < 0.0) rows.push_back(r);
      if (rows != polished_rows) {
        polished_rows = rows;
        Vec candidate = u;
        std::vector<double> lambda(static_cast<std::size_t>(m), 0.0);
        report.rho = rho;
        if (polish_active(energy, p, a, c, rows, candidate, lambda) &&
            certify(candidate, lambda, false))
          return finish(domain, constraint, z, report, start);
      }
    }

    // Residual balancing.
    if (it % config.check_every == 0) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        w *= 0.5;
      } else if (dual > 10.0 * primal) {
        rho *= 0.5;
        w *= 2.0;
      }
    }
  }
  report.rho = rho;
  fail(tracker, report, z, z_energy, start);
}

// ---------------------------------------------------------------------------

SolveResult solve_projected_gradient(const EnergyEvaluator& energy, const GridDomain& domain,
                                     const ConstraintSet& constraint, const SolverConfig& config,
                                     SolveReport report, Clock::time_point start) {
  const auto n = static_cast<Eigen::Index>(domain.size());
  ConvexProjector projector(domain, constraint, config.projection);
  ConvexProjector checker(domain, constraint, config.projection);
  std::vector<double> init = initial_iterate(domain, constraint, config);
  Vec u = Eigen::Map<const Vec>(init.data(), n);
  Vec g;
  double e = energy.value_and_gradient(as_span(u), g);
  report.energy_trace.push_back(e);

  double step = config.step_size;
  if (step == 0.0) {
    SpMat h = energy.hessian(as_span(u));
    double row_max = 0.0;
    for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
      double sum = 0.0;
      for (SpMat::InnerIterator itr(h, k); itr; ++itr) sum += std::abs(itr.value());
      row_max = std::max(row_max, sum);
    }
    step = row_max > 0.0 ? 1.0 / row_max : 1.0;
  }
  const double base_step = step;
  double prev_step = step;
  std::vector<double> mu;
  Tracker tracker{domain, constraint, nullptr};
  double last_checked_energy = std::numeric_limits<double>::quiet_NaN();

  auto project_step = [&](double t) {
    Vec v = u - t * g;
    ProjectionResult r;
    if (mu.empty()) {
      r = projector.project(as_span(v));
    } else {
      std::vector<double> guess(mu);
      for (double& x : guess) x *= t / prev_step;
      r = projector.project(as_span(v), guess);
    }
    return Vec(Eigen::Map<const Vec>(r.values.data(), n));
  };

  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    report.iterations = it;
    Vec trial;
    double e_trial = 0.0;
    Vec g_trial;
    switch (config.step_rule) {
      case StepRule::fixed:
      case StepRule::diminishing: {
        double t = config.step_rule == StepRule::fixed
                       ? base_step
                       : base_step / std::sqrt(static_cast<double>(it));
        trial = project_step(t);
        mu = projector.multipliers();
        prev_step = t;
        e_trial = energy.value_and_gradient(as_span(trial), g_trial);
        break;
      }
      case StepRule::backtracking: {
        double t = std::min(step * 2.0, 1e6 * base_step);
        for (int ls = 0;; ++ls) {
          trial = project_step(t);
          e_trial = energy.value_and_gradient(as_span(trial), g_trial);
          double decrease = g.dot(trial - u);
          if (e_trial <= e + config.armijo * decrease + 1e-12 * std::abs(e) || ls >= 60) break;
          t *= 0.5;
        }
        mu = projector.multipliers();
        prev_step = t;
        step = t;
        break;
      }
    }
    u = trial;
    e = e_trial;
    g = g_trial;
    report.energy_trace.push_back(e);

    if (it % config.check_every == 0 || it == config.max_iterations) {
      double stat = stationarity(checker, as_span(u), g);
      tracker.offer(u, e, stat, report);
      bool energy_done = config.energy_tol > 0.0 && std::isfinite(last_checked_energy) &&
                         std::abs(e - last_checked_energy) <= config.energy_tol * (1.0 + std::abs(e));
      last_checked_energy = e;
      if (stat <= config.stationarity_tol || energy_done) {
        report.status = "converged";
        report.energy = e;
        report.stationarity = stat;
        return finish(domain, constraint, u, report, start);
      }
    }
  }
  fail(tracker, report, u, e, start);
}

}  // namespace

SolveResult solve(const Functional& model, const PreferenceFunction& b, const GridDomain& domain,
                  const ConstraintSet& constraint, const SolverConfig& config) {
  const auto start = Clock::now();
  config.validate();
  model.validate();
  domain.validate();
  if (b.dim() != domain.dim) throw InvalidArgument("preference and grid dimensions differ");

  SolveReport report;
  report.method = config.method;
  report.convex_objective =
      b.kind() == PreferenceKind::bilinear || b.kind() == PreferenceKind::separable_concave;
  if (b.kind() == PreferenceKind::bilinear) {
    report.h1_smoke_pass = check_H1(model, b, SampleSpec{64, config.seed, 2.0, 1, 1}).pass();
  }

  EnergyEvaluator energy(model, b, domain);
  if (config.method == SolverMethod::admm)
    return solve_admm(energy, domain, constraint, config, report, start);
  return solve_projected_gradient(energy, domain, constraint, config, report, start);
}

ELResidual el_residual_1d(std::span<const double> u, double q, double spacing) {
  if (!(q > 1.0)) throw InvalidArgument("q must exceed 1");
  if (!(spacing > 0.0)) throw InvalidArgument("spacing must be positive");
  if (u.size() < 3) throw InvalidArgument("need at least 3 nodes");
  auto flux = [&](std::size_t i) {
    double d = (u[i + 1] - u[i]) / spacing;
    return d == 0.0 ? 0.0 : std::pow(std::abs(d), q - 2.0) * d;
  };
  ELResidual out;
  out.field.resize(u.size() - 2);
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    double r = (flux(i) - flux(i - 1)) / spacing - 1.0;
    out.field[i - 1] = r;
    out.sup = std::max(out.sup, std::abs(r));
  }
  return out;
}

}  // namespace screener

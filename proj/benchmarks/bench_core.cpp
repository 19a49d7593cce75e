#include <benchmark/benchmark.h>

#include "screener/convexgrid.hpp"
#include "screener/model.hpp"
#include "screener/parallel.hpp"
#include "screener/qconvex.hpp"
#include "screener/reference1d.hpp"
#include "screener/solver.hpp"

using namespace screener;

static void BM_Projection2d(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto d = GridDomain::rectangle(0.0, 1.0, n, 0.0, 1.0, n);
  auto c = ConstraintSet::convex_only(d);
  auto rng = stream_rng(1, 0);
  std::vector<double> v(d.size());
  for (auto& e : v) e = uniform(rng, -1.0, 1.0);
  for (auto _ : state) {
    ConvexProjector proj(d, c);
    benchmark::DoNotOptimize(proj.project(v).values.data());
  }
}
BENCHMARK(BM_Projection2d)->Arg(9)->Arg(17)->Unit(benchmark::kMillisecond);

static void BM_EnergyGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto d = GridDomain::rectangle(1.0, 2.0, n, 1.0, 2.0, n);
  auto b = make_bilinear(d.box(), Box::cube(2, -10.0, 10.0));
  auto m = rochet_chone(2.5, ScalarProfile::constant(1.0), d.box());
  EnergyEvaluator e(m, *b, d);
  std::vector<double> u;
  for (std::size_t k = 0; k < d.size(); ++k) u.push_back(0.5 * d.point(k).squaredNorm());
  Vec g;
  for (auto _ : state) benchmark::DoNotOptimize(e.value_and_gradient(u, g));
}
BENCHMARK(BM_EnergyGradient)->Arg(33)->Arg(65)->Unit(benchmark::kMicrosecond);

static void BM_Solve1d(benchmark::State& state) {
  auto ref = reference_problem(3.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto r = solve(ref.model, *ref.preference, ref.domain, ref.constraint, SolverConfig{});
    benchmark::DoNotOptimize(r.report.energy);
  }
}
BENCHMARK(BM_Solve1d)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

static void BM_VerifyStrongConvexity(benchmark::State& state) {
  SampleSpec s;
  s.count = 10000;
  for (auto _ : state) benchmark::DoNotOptimize(verify_strong_convexity(3.0, derive_c(3.0).c, s).samples);
}
BENCHMARK(BM_VerifyStrongConvexity)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>

#include "regulab/elliptic_ops.hpp"
#include "regulab/grid.hpp"
#include "regulab/pointwise.hpp"
#include "regulab/regularity.hpp"
#include "regulab/scheme.hpp"
#include "regulab/solver.hpp"

using namespace regulab;

static void BM_PucciPlus(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<SymMatrix> ms(1024);
  for (auto& m : ms) m = SymMatrix(u(rng), u(rng), u(rng));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pucci_plus(ms[i++ & 1023], 1.0, 2.0));
}
BENCHMARK(BM_PucciPlus);

static void BM_IsaacsEval(benchmark::State& state) {
  const OperatorSpec op = OperatorSpec::isaacs(1.0, 2.0);
  const SymMatrix m(0.3, -0.7, 1.1);
  for (auto _ : state) benchmark::DoNotOptimize(op(m));
}
BENCHMARK(BM_IsaacsEval);

static void BM_PointwiseFit(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  std::vector<FitSample> samples;
  for (int i = -6; i <= 6; ++i)
    for (int j = 0; j <= 6; ++j) {
      const Vec2 x{i / 6.0, j / 6.0};
      samples.push_back({x, x.x2 + 0.3 * x.x1 * x.x2 + std::pow(x.norm(), 2.5)});
    }
  for (auto _ : state) benchmark::DoNotOptimize(pointwise_fit(samples, {0.0, 0.0}, k, 0.5));
}
BENCHMARK(BM_PointwiseFit)->Arg(1)->Arg(2);

static void BM_SolveHalfBall(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  const OperatorSpec op = state.range(1) == 0 ? OperatorSpec::laplace() : OperatorSpec::pucci_plus(1.0, 2.0);
  const int n_dirs = state.range(1) == 0 ? 4 : 16;
  const auto grid = build_grid(make_domain(DomainKind::half_ball), h, 1.0, n_dirs);
  const auto sys = discretize(op, grid, n_dirs);
  const std::vector<double> f(grid->num_nodes(), 1.0);
  const auto g = boundary_values(*grid, [](Vec2 p, int) { return p.x1 * p.x2 + p.x2; });
  for (auto _ : state) benchmark::DoNotOptimize(solve(sys, f, g));
  state.counters["nodes"] = static_cast<double>(grid->num_nodes());
}
BENCHMARK(BM_SolveHalfBall)->Args({32, 0})->Args({64, 0})->Args({128, 0})->Args({32, 1})->Args({64, 1})
    ->Unit(benchmark::kMillisecond);

static void BM_CampanatoC1a(benchmark::State& state) {
  const Domain dom = make_domain(DomainKind::half_ball);
  const auto grid = build_grid(dom, 1.0 / 64.0, 1.0, 4);
  const auto sys = discretize(OperatorSpec::laplace(), grid, 4);
  const std::vector<double> f(grid->num_nodes(), 0.0);
  const auto u = solve(sys, f, boundary_values(*grid, [](Vec2 p, int) { return p.x2 * (1.0 + p.x1 * p.x1); }));
  IterationConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(campanato_c1a(u, dom, cfg));
}
BENCHMARK(BM_CampanatoC1a)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "ineq/decomposition.hpp"
#include "ineq/estimators.hpp"
#include "ineq/pipeline.hpp"
#include "ineq/quantile_solver.hpp"
#include "ineq/validation.hpp"

using namespace ineq;

namespace {

DesignMatrix case_design(int which, std::size_t n)
{
    return build_design(generate_synthetic(case_preset(which, n, 1)));
}

}  // namespace

static void BM_SolveQuantile(benchmark::State& state)
{
    const auto d = case_design(3, static_cast<std::size_t>(state.range(0)));
    QuantileSolverOptions opts;
    opts.preprocess = state.range(1) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(solve_quantile(d.regressors(), d.response(), 0.37, opts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SolveQuantile)
    ->ArgsProduct({{1000, 10000, 50000}, {0, 1}})
    ->ArgNames({"n", "preprocess"})
    ->Unit(benchmark::kMillisecond);

static void BM_Pipeline(benchmark::State& state)
{
    const auto d = case_design(2, static_cast<std::size_t>(state.range(0)));
    PipelineConfig cfg;
    cfg.workers = 1;
    for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(d, cfg));
}
BENCHMARK(BM_Pipeline)->Arg(5000)->Arg(50000)->Unit(benchmark::kMillisecond)->Iterations(1);

static void BM_Decompose(benchmark::State& state)
{
    const auto d = case_design(1, 50000);
    const auto m = compute_moments(d);
    const Vector beta = Vector::Constant(3, 0.1);
    const Matrix omega = Matrix::Identity(3, 3) * 0.01;
    for (auto _ : state) benchmark::DoNotOptimize(decompose(beta, omega, m));
}
BENCHMARK(BM_Decompose);

static void BM_ComputeMoments(benchmark::State& state)
{
    const auto d = case_design(1, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(compute_moments(d));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeMoments)->Arg(50000);

BENCHMARK_MAIN();

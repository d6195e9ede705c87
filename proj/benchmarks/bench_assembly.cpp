#include <benchmark/benchmark.h>

#include <cmath>

#include "dwrlab/assembly.hpp"

using namespace dwrlab;

static void BM_AssembleResidualAdvection(benchmark::State& state) {
    const PrimalProblem problem = catalog_case("advection_sine").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, state.range(0), 2), problem.kind);
    const Vector u = space.project([](double x, double) { return std::sin(3.0 * x); });
    for (auto _ : state)
        benchmark::DoNotOptimize(assemble_residual(space, problem, u));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleResidualAdvection)->Range(32, 1024)->Complexity(benchmark::oN);

static void BM_AssembleJacobianBurgers(benchmark::State& state) {
    const PrimalProblem problem = catalog_case("burgers_sine").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, state.range(0), 2), problem.kind);
    const Vector u = space.project(catalog_case("burgers_sine").solution.u);
    for (auto _ : state)
        benchmark::DoNotOptimize(assemble_jacobian(space, problem, u));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleJacobianBurgers)->Range(32, 512)->Complexity(benchmark::oN);

BENCHMARK_MAIN();

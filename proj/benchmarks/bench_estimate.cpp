#include <benchmark/benchmark.h>

#include "dwrlab/error_estimate.hpp"

using namespace dwrlab;

static void BM_FinePairAndEstimate(benchmark::State& state) {
    OutputFunctional output;
    output.interior_weight = [](double, double) { return 1.0; };
    const PrimalProblem problem = catalog_case("advection_sine").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, state.range(0), 1), problem.kind);
    const Vector u = solve_primal(space, problem);
    for (auto _ : state) {
        const FinePair pair = build_fine_pair(space, problem, output, u);
        benchmark::DoNotOptimize(primal_estimate(pair, problem));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FinePairAndEstimate)->Range(16, 256)->Complexity(benchmark::oN);


#include <benchmark/benchmark.h>

#include "dwrlab/assembly.hpp"

using namespace dwrlab;

static void BM_BandedSolve(benchmark::State& state) {
    const PrimalProblem problem = catalog_case("diffusion_sine").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, state.range(0), 2), problem.kind);
    const SparseMatrix a = assemble_jacobian(space, problem, Vector(space.n_dofs(), 0.0));
    const Vector b = load_vector(space, problem);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve(a, b));
    state.SetComplexityN(space.n_dofs());
}
BENCHMARK(BM_BandedSolve)->Range(64, 4096)->Complexity(benchmark::oN);

static void BM_FactorizeOnceSolveMany(benchmark::State& state) {
    const PrimalProblem problem = catalog_case("diffusion_sine").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 512, 2), problem.kind);
    const SparseMatrix a = assemble_jacobian(space, problem, Vector(space.n_dofs(), 0.0));
    const LuFactorization lu(a);
    const Vector b = load_vector(space, problem);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lu.solve(b));
        benchmark::DoNotOptimize(lu.solve_transpose(b));
    }
}
BENCHMARK(BM_FactorizeOnceSolveMany);


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dwrlab/adjoint.hpp"
#include "dwrlab/time_march.hpp"

using namespace dwrlab;

namespace {

Vector random_vector(std::mt19937_64& rng, int n, double shift = 0.0) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(n);
    for (double& x : v) x = dist(rng) + shift;
    return v;
}

OutputFunctional interior_one() {
    OutputFunctional out;
    out.interior_weight = [](double, double) { return 1.0; };
    return out;
}

} // namespace

TEST_CASE("advection residual vanishes at the discrete solution") {
    const PrimalProblem problem = catalog_case("advection_sine").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 2), problem.kind);
    const Vector u = solve_primal(space, problem);
    CHECK(inf_norm(assemble_residual(space, problem, u)) <= 1e-12);
}

TEST_CASE("advection preserves transported constants") {
    PrimalProblem problem;
    problem.kind = ProblemKind::SteadyAdvection;
    problem.advection_speed = 1.5;
    problem.dirichlet_left = 0.7;
    problem.source = [](double, double) { return 0.0; };
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 5, 2), problem.kind);
    const Vector constant(space.n_dofs(), 0.7);
    CHECK(inf_norm(assemble_residual(space, problem, constant)) <= 1e-13);
}

TEST_CASE("Burgers residual at the injected manufactured solution") {
    const PrimalProblem problem = catalog_case("burgers_linear").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 4, 3), problem.kind);
    const Vector u = space.project([](double x, double) { return 1.0 + x; });
    CHECK(inf_norm(assemble_residual(space, problem, u)) <= 1e-10);
}

TEST_CASE("Jacobian is state-independent for linear variants") {
    std::mt19937_64 rng(31);
    for (const std::string& id : {"advection_sine", "diffusion_sine"}) {
        const PrimalProblem problem = catalog_case(id).problem;
        const DiscreteSpace space(uniform_mesh(0.0, 1.0, 6, 2), problem.kind);
        const Vector u1 = random_vector(rng, space.n_dofs());
        const Vector u2 = random_vector(rng, space.n_dofs());
        const SparseMatrix j1 = assemble_jacobian(space, problem, u1);
        const SparseMatrix j2 = assemble_jacobian(space, problem, u2);
        const Vector probe = random_vector(rng, space.n_dofs());
        Vector d = j1.matvec(probe);
        axpy(-1.0, j2.matvec(probe), d);
        CHECK(inf_norm(d) <= 1e-14);
    }
}

TEST_CASE("Burgers Jacobian matches central differences at u = 1 + x") {
    const PrimalProblem problem = catalog_case("burgers_linear").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 5, 3), problem.kind);
    const Vector u = space.project([](double x, double) { return 1.0 + x; });
    const SparseMatrix jac = assemble_jacobian(space, problem, u);
    std::mt19937_64 rng(47);
    const double eps = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        const Vector dir = random_vector(rng, space.n_dofs());
        Vector up = u, um = u;
        axpy(eps, dir, up);
        axpy(-eps, dir, um);
        const Vector rp = assemble_residual(space, problem, up);
        const Vector rm = assemble_residual(space, problem, um);
        const Vector jv = jac.matvec(dir);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < space.n_dofs(); ++i) {
            const double fd = (rp[i] - rm[i]) / (2.0 * eps);
            num += (jv[i] - fd) * (jv[i] - fd);
            den += jv[i] * jv[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-6);
    }
}

TEST_CASE("Burgers Jacobian at the zero state has no volume coupling") {
    const PrimalProblem problem = catalog_case("burgers_linear").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 4, 3), problem.kind);
    const Vector zero(space.n_dofs(), 0.0);
    const SparseMatrix jac = assemble_jacobian(space, problem, zero);
    // interior Lobatto nodes have zero trace: at u = 0 their couplings are
    // purely volumetric and the linearized volume terms vanish
    for (int e = 0; e < space.n_elements(); ++e)
        for (int i = 1; i < space.n_local(e) - 1; ++i)
            for (int j = 0; j < space.n_local(e); ++j)
                CHECK(std::abs(jac.coeff(space.dof_start(e) + i, space.dof_start(e) + j)) <=
                      1e-14);
}

TEST_CASE("solve_primal: advection solution is exact when representable") {
    const PrimalProblem problem = catalog_case("advection_unit").problem;
    for (int p : {1, 2, 3}) {
        const DiscreteSpace space(uniform_mesh(0.0, 1.0, 7, p), problem.kind);
        const Vector u = solve_primal(space, problem);
        const Vector exact = space.project([](double x, double) { return x; });
        Vector d = u;
        axpy(-1.0, exact, d);
        CHECK(inf_norm(d) <= 1e-12);
    }
}

TEST_CASE("solve_primal: diffusion quadratic exact at p = 2") {
    const PrimalProblem problem = catalog_case("diffusion_quadratic").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 6, 2), problem.kind);
    const Vector u = solve_primal(space, problem);
    for (int i = 0; i <= 20; ++i) {
        const double x = i / 20.0;
        CHECK(std::abs(space.eval_at(u, x) - (2.0 * x - x * x)) <= 1e-11);
    }
}

TEST_CASE("solve_primal: Burgers manufactured solution at p = 3") {
    const PrimalProblem problem = catalog_case("burgers_linear").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 6, 3), problem.kind);
    SolveReport report;
    const Vector u = solve_primal(space, problem, &report);
    for (int i = 0; i <= 20; ++i) {
        const double x = i / 20.0;
        CHECK(std::abs(space.eval_at(u, x) - (1.0 + x)) <= 1e-9);
    }
    CHECK(report.residual_norm <= 1e-12);
}

TEST_CASE("evaluate_output: interior, boundary, and flux forms") {
    {
        const PrimalProblem problem = catalog_case("advection_unit").problem;
        const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 2), problem.kind);
        const Vector u = solve_primal(space, problem);
        CHECK(evaluate_output(space, problem, interior_one(), u) ==
              doctest::Approx(0.5).epsilon(1e-13));
    }
    {
        const PrimalProblem problem = catalog_case("diffusion_quadratic").problem;
        const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 2), problem.kind);
        const Vector u = solve_primal(space, problem);
        OutputFunctional out;
        out.right_boundary_weight = 1.0;
        CHECK(evaluate_output(space, problem, out, u) == doctest::Approx(1.0).epsilon(1e-11));
    }
    {
        const PrimalProblem problem = catalog_case("burgers_linear").problem;
        const DiscreteSpace space(uniform_mesh(0.0, 1.0, 6, 3), problem.kind);
        const Vector u = solve_primal(space, problem);
        OutputFunctional out;
        out.quadratic_flux = true;
        CHECK(evaluate_output(space, problem, out, u) == doctest::Approx(2.0).epsilon(1e-9));
    }
}

TEST_CASE("output_linearization: point output at a node is a Cartesian row") {
    const PrimalProblem problem = catalog_case("advection_unit").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 4, 1), problem.kind);
    OutputFunctional out;
    out.point_location = 0.375; // midpoint-free: not a mesh boundary, p=1 nodes at ends
    // place the point at a Lobatto node by using element [0.25, 0.5]'s right node
    out.point_location = 0.5 - 1e-9;
    const Vector g =
        output_linearization(space, problem, out, Vector(space.n_dofs(), 0.0));
    int nonzero = 0;
    for (double v : g)
        if (std::abs(v) > 1e-6) ++nonzero;
    CHECK(nonzero <= 2);
    double sum = 0.0;
    for (double v : g) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("output_linearization: partition of unity for g = 1") {
    const PrimalProblem problem = catalog_case("advection_unit").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 2.0, 5, 3), problem.kind);
    const Vector g =
        output_linearization(space, problem, interior_one(), Vector(space.n_dofs(), 0.0));
    double sum = 0.0;
    for (double v : g) sum += v;
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("output_linearization: flux output matches finite differences") {
    const PrimalProblem problem = catalog_case("burgers_linear").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 5, 2), problem.kind);
    const Vector u = space.project([](double x, double) { return 1.0 + x; });
    OutputFunctional out;
    out.quadratic_flux = true;
    const Vector g = output_linearization(space, problem, out, u);
    std::mt19937_64 rng(53);
    const double eps = 1e-6;
    for (int trial = 0; trial < 5; ++trial) {
        const Vector dir = random_vector(rng, space.n_dofs());
        Vector up = u, um = u;
        axpy(eps, dir, up);
        axpy(-eps, dir, um);
        const double fd = (evaluate_output(space, problem, out, up) -
                           evaluate_output(space, problem, out, um)) /
                          (2.0 * eps);
        const double lin = dot(g, dir);
        CHECK(std::abs(lin - fd) <= 1e-7 * std::max(1.0, std::abs(lin)));
    }
}

TEST_CASE("march_linear: constant state when the operator vanishes") {
    const SparseMatrix mass = SparseMatrix::identity(1);
    const SparseMatrix zero(1, 1, {});
    const SpaceTimeSolution sol = march_linear(
        mass, zero, [](int) { return Vector{0.0}; }, Vector{3.25}, 0.1, 12);
    for (int m = 1; m <= 12; ++m) CHECK(sol.at(m)[0] == doctest::Approx(3.25).epsilon(1e-15));
}

TEST_CASE("march_linear: scalar decay matches the closed-form recursion") {
    const double lambda = 2.5, dt = 0.125;
    const int n_steps = 10;
    const SparseMatrix mass = SparseMatrix::identity(1);
    const SparseMatrix a(1, 1, {{0, 0, lambda}});
    const SpaceTimeSolution sol =
        march_linear(mass, a, [](int) { return Vector{0.0}; }, Vector{1.0}, dt, n_steps);
    for (int m = 1; m <= n_steps; ++m) {
        const double expect = std::pow(1.0 + lambda * dt, -m);
        CHECK(std::abs(sol.at(m)[0] - expect) <= 1e-13);
    }
}

TEST_CASE("time_march: per-step unsteady residual is tiny") {
    const PrimalProblem problem = catalog_case("unsteady_decay").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 1), problem.kind);
    const SpaceTimeSolution traj = time_march(space, problem);
    for (int m = 1; m <= traj.n_steps(); ++m)
        CHECK(inf_norm(unsteady_residual_step(space, problem, traj, m)) <= 1e-11);
}

TEST_CASE("conservation: upwind fluxes telescope") {
    PrimalProblem problem;
    problem.kind = ProblemKind::SteadyAdvection;
    problem.advection_speed = 2.0;
    problem.dirichlet_left = 1.3;
    problem.source = [](double, double) { return 0.0; };
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 9, 2), problem.kind);
    const Vector u = solve_primal(space, problem);
    const double outflow = space.eval_at(u, 1.0);
    CHECK(std::abs(problem.advection_speed * outflow -
                   problem.advection_speed * problem.dirichlet_left) <= 1e-12);
}

TEST_CASE("Galerkin orthogonality of the coarse residual") {
    for (const std::string& id : {"advection_sine", "diffusion_sine", "burgers_sine"}) {
        const PrimalProblem problem = catalog_case(id).problem;
        const DiscreteSpace space(uniform_mesh(0.0, 1.0, 7, 1), problem.kind);
        const Vector u = solve_primal(space, problem);
        // V_H . R_H(U_H) = 0 for every coarse basis vector
        const Vector r = assemble_residual(space, problem, u);
        CHECK(inf_norm(r) <= 1e-11);
        // and the coarse test functions annihilate the fine residual of the
        // injected state (nested-form consistency)
        const DiscreteSpace fine = enrich_space(space);
        const InjectionOperator inj = space_injection(space, fine);
        const Vector rf = assemble_residual(fine, problem, inj.apply(u));
        const Vector restricted = inj.matrix.matvec_transpose(rf);
        CHECK(inf_norm(restricted) <= 1e-11);
    }
}

TEST_CASE("discrete adjoint has no interface oscillations (consistency smoke)") {
    // interior output with g in the space; adjoint jumps must shrink at
    // rate >= p + 1/2 under refinement
    PrimalProblem problem = catalog_case("advection_unit").problem;
    OutputFunctional out;
    out.interior_weight = [](double x, double) { return x; };
    const int p = 1;
    std::vector<double> hs, jumps;
    for (int n : {8, 16, 32, 64}) {
        const DiscreteSpace space(uniform_mesh(0.0, 1.0, n, p), problem.kind);
        const Vector u = solve_primal(space, problem);
        const AdjointVector adj = solve_steady_adjoint(space, problem, out, u);
        double worst = 0.0;
        for (int f = 1; f < n; ++f) {
            const double x = space.mesh().boundaries()[f];
            const double left = space.eval(adj.coefficients, f - 1, x);
            const double right = space.eval(adj.coefficients, f, x);
            worst = std::max(worst, std::abs(left - right));
        }
        hs.push_back(1.0 / n);
        jumps.push_back(worst);
    }
    for (std::size_t i = 1; i < jumps.size(); ++i) {
        const double rate = std::log(jumps[i - 1] / jumps[i]) / std::log(2.0);
        CHECK(rate >= p + 0.5);
    }
}

TEST_CASE("state serialization round-trips bitwise") {
    const Vector u = {0.1, -2.0 / 3.0, 1e-17, 12345.678901234567};
    const Vector parsed = read_state(write_state(u));
    REQUIRE(parsed.size() == u.size());
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(parsed[i] == u[i]);
    CHECK_THROWS_AS(read_state("state v2 1\n0\n"), ParseError);
}

#include "dwrlab/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "dwrlab/adapt.hpp"
#include "dwrlab/io.hpp"
#include "dwrlab/study.hpp"

namespace dwrlab {

bool VerifyReport::all_pass() const {
    for (const CheckResult& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string VerifyReport::text() const {
    std::ostringstream os;
    for (const CheckResult& c : checks)
        os << "CHECK " << c.name << " " << format_real(c.measured) << " "
           << format_real(c.tolerance) << " " << (c.pass ? "PASS" : "FAIL") << "\n";
    return os.str();
}

namespace {

struct Harness {
    VerifyReport report;
    std::mt19937_64 rng;
    std::string mutate;

    void add(const std::string& name, double measured, double tol) {
        report.checks.push_back({name, measured, tol, measured <= tol});
    }

    double uniform(double lo = -1.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }

    Vector random_vector(int n) {
        Vector v(n);
        for (double& x : v) x = uniform();
        return v;
    }

    SparseMatrix random_matrix(int n, bool diagonally_dominant = true) {
        std::vector<Triplet> trip;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = uniform();
                if (diagonally_dominant && i == j) v += n;
                trip.push_back({i, j, v});
            }
        return SparseMatrix(n, n, std::move(trip));
    }
};

struct NamedCase {
    std::string name;
    PrimalProblem problem;
    OutputFunctional output;
};

std::vector<NamedCase> linear_steady_cases() {
    std::vector<NamedCase> cases;
    OutputFunctional g_one;
    g_one.interior_weight = [](double, double) { return 1.0; };
    {
        NamedCase c;
        c.name = "advection_unit_g1";
        c.problem = catalog_case("advection_unit").problem;
        c.output = g_one;
        cases.push_back(c);
    }
    {
        NamedCase c;
        c.name = "advection_sine_point";
        c.problem = catalog_case("advection_sine").problem;
        c.output.point_location = 0.5 - 1e-9;
        cases.push_back(c);
    }
    {
        NamedCase c;
        c.name = "advection_nonzero_uL";
        c.problem.kind = ProblemKind::SteadyAdvection;
        c.problem.advection_speed = 2.0;
        c.problem.dirichlet_left = 0.5;
        c.problem.source = [](double, double) { return 3.0; };
        c.output = g_one;
        c.output.right_boundary_weight = 1.0;
        cases.push_back(c);
    }
    {
        NamedCase c;
        c.name = "diffusion_quadratic_gR";
        c.problem = catalog_case("diffusion_quadratic").problem;
        c.output = g_one;
        c.output.right_boundary_weight = 1.0;
        c.output.left_derivative_weight = 1.0;
        cases.push_back(c);
    }
    {
        NamedCase c;
        c.name = "diffusion_sine_g1";
        c.problem = catalog_case("diffusion_sine").problem;
        c.output = g_one;
        cases.push_back(c);
    }
    return cases;
}

void check_transpose_identity(Harness& h) {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + static_cast<int>(h.rng() % 46);
        const SparseMatrix a = h.random_matrix(n, false);
        const Vector u = h.random_vector(n);
        const Vector v = h.random_vector(n);
        const double lhs = dot(a.matvec(u), v);
        const double rhs = dot(u, a.matvec_transpose(v));
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    h.add("transpose_identity", worst, 1e-12);
}

void check_solve_transpose(Harness& h) {
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 8 + static_cast<int>(h.rng() % 25);
        const SparseMatrix a = h.random_matrix(n);
        const Vector b = h.random_vector(n);
        const Vector x = solve_transpose(a, b);
        Vector r = a.matvec_transpose(x);
        axpy(-1.0, b, r);
        worst = std::max(worst, inf_norm(r));
    }
    h.add("solve_transpose_residual", worst, 1e-12);
}

void check_quadrature(Harness& h) {
    double worst = 0.0;
    for (int n = 1; n <= 16; ++n) {
        const QuadratureRule rule = gauss_rule(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double integral = 0.0;
            for (int q = 0; q < rule.size(); ++q)
                integral += rule.weights[q] * std::pow(rule.points[q], k);
            const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            worst = std::max(worst, std::abs(integral - exact));
        }
    }
    h.add("quadrature_exactness", worst, 1e-13);
}

void check_injection_lossless(Harness& h) {
    double worst = 0.0;
    const Mesh1D coarse_mesh = uniform_mesh(0.0, 1.0, 5, 2);
    const DiscreteSpace coarse(coarse_mesh, ProblemKind::SteadyAdvection);
    for (int mode = 0; mode < 2; ++mode) {
        const DiscreteSpace fine =
            mode == 0 ? enrich_space(coarse) : refine_space_uniform(coarse);
        const InjectionOperator inj = space_injection(coarse, fine);
        const Vector u = h.random_vector(coarse.n_dofs());
        const Vector uf = inj.apply(u);
        for (int s = 0; s < 50; ++s) {
            const double x = h.uniform(0.0, 1.0);
            worst = std::max(worst, std::abs(coarse.eval_at(u, x) - fine.eval_at(uf, x)));
        }
    }
    h.add("injection_losslessness", worst, 1e-13);
}

void check_fd_jacobian(Harness& h) {
    double worst = 0.0;
    std::vector<PrimalProblem> problems = {
        catalog_case("advection_sine").problem,
        catalog_case("diffusion_sine").problem,
        catalog_case("burgers_sine").problem,
    };
    for (const PrimalProblem& problem : problems) {
        const DiscreteSpace space(uniform_mesh(0.0, 1.0, 6, 2), problem.kind);
        for (int trial = 0; trial < 7; ++trial) {
            Vector u = h.random_vector(space.n_dofs());
            for (double& v : u) v += 1.5; // keep Burgers away from wave-speed ties
            const Vector dir = h.random_vector(space.n_dofs());
            const SparseMatrix jac = assemble_jacobian(space, problem, u);
            const Vector jv = jac.matvec(dir);
            const double eps = 1e-6;
            Vector up = u, um = u;
            axpy(eps, dir, up);
            axpy(-eps, dir, um);
            const Vector rp = assemble_residual(space, problem, up);
            const Vector rm = assemble_residual(space, problem, um);
            double num = 0.0, den = 0.0;
            for (int i = 0; i < space.n_dofs(); ++i) {
                const double fd = (rp[i] - rm[i]) / (2.0 * eps);
                num += (jv[i] - fd) * (jv[i] - fd);
                den += jv[i] * jv[i];
            }
            worst = std::max(worst, std::sqrt(num / std::max(den, 1e-30)));
        }
    }
    h.add("fd_jacobian", worst, 1e-6);
}

void check_inverse_row_oracle(Harness& h) {
    double worst = 0.0;
    for (const NamedCase& c : linear_steady_cases()) {
        const DiscreteSpace space(
            uniform_mesh(c.problem.x_left, c.problem.x_right, 8, 1), c.problem.kind);
        const Vector u = solve_primal(space, c.problem);
        const AdjointVector direct = solve_steady_adjoint(space, c.problem, c.output, u);
        const AdjointVector oracle = inverse_row_oracle(space, c.problem, c.output);
        Vector diff = direct.coefficients;
        axpy(-1.0, oracle.coefficients, diff);
        worst = std::max(worst, inf_norm(diff));
    }
    h.add("inverse_row_oracle", worst, 1e-10);
}

void check_dual_form_steady(Harness& h) {
    double worst = 0.0;
    for (const NamedCase& c : linear_steady_cases()) {
        const DiscreteSpace space(
            uniform_mesh(c.problem.x_left, c.problem.x_right, 12, 2), c.problem.kind);
        const Vector u = solve_primal(space, c.problem);
        const double j = evaluate_output(space, c.problem, c.output, u);
        AdjointVector adj = solve_steady_adjoint(space, c.problem, c.output, u);
        Vector f = load_vector(space, c.problem);
        if (h.mutate == "adjoint_sign_flip")
            for (double& v : adj.coefficients) v = -v;
        worst = std::max(worst, std::abs(dot(adj.coefficients, f) - j) /
                                    std::max(1.0, std::abs(j)));
    }
    h.add("dual_form_steady", worst, 1e-11);
}

void check_dual_form_unsteady(Harness& h) {
    const PrimalProblem problem = catalog_case("unsteady_decay").problem;
    OutputFunctional output;
    output.interior_weight = [](double, double) { return 1.0; };
    output.time_begin = 0.0;
    output.time_end = problem.final_time;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 1), problem.kind);
    const SpaceTimeSolution traj = time_march(space, problem);
    const double j = evaluate_unsteady_output(space, problem, output, traj);
    const SpaceTimeAdjoint adj = solve_unsteady_adjoint(space, problem, output, traj);
    // stacked data vector: per-step load plus the initial-condition carry
    const SparseMatrix mass = mass_matrix(space);
    double jd = 0.0;
    for (int m = 1; m <= traj.n_steps(); ++m) {
        Vector f = load_vector(space, problem, m * traj.dt);
        if (m == 1) {
            const Vector mi = mass.matvec(traj.initial);
            axpy(1.0 / traj.dt, mi, f);
        }
        jd += dot(adj.at(m), f);
    }
    h.add("dual_form_unsteady", std::abs(jd - j) / std::max(1.0, std::abs(j)), 1e-11);
}

void check_march_vs_monolithic(Harness& h) {
    const PrimalProblem problem = catalog_case("unsteady_decay").problem;
    OutputFunctional output;
    output.point_location = 0.5 - 1e-9;
    output.time_begin = output.time_end = problem.final_time;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 1), problem.kind);
    const SpaceTimeSolution traj = time_march(space, problem);
    const SpaceTimeAdjoint backward = solve_unsteady_adjoint(space, problem, output, traj);
    const SpaceTimeAdjoint monolithic =
        monolithic_spacetime_adjoint(space, problem, output, traj);
    double worst = 0.0;
    for (int m = 1; m <= traj.n_steps(); ++m) {
        Vector diff = backward.at(m);
        axpy(-1.0, monolithic.at(m), diff);
        worst = std::max(worst, inf_norm(diff));
    }
    h.add("march_vs_monolithic", worst, 1e-10);
}

void check_checkpointing(Harness& h) {
    const PrimalProblem problem = catalog_case("unsteady_decay").problem;
    OutputFunctional output;
    output.interior_weight = [](double, double) { return 1.0; };
    output.time_begin = 0.0;
    output.time_end = problem.final_time;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 6, 1), problem.kind);
    const SpaceTimeSolution traj = time_march(space, problem);
    const SpaceTimeAdjoint full = solve_unsteady_adjoint(space, problem, output, traj);
    double worst = 0.0;
    for (int k : {1, 3, problem.num_steps}) {
        const SpaceTimeAdjoint cp =
            solve_unsteady_adjoint_checkpointed(space, problem, output, k);
        for (int m = 1; m <= traj.n_steps(); ++m) {
            Vector diff = cp.at(m);
            axpy(-1.0, full.at(m), diff);
            worst = std::max(worst, inf_norm(diff));
        }
    }
    h.add("checkpoint_equivalence", worst, 1e-14);
}

void check_linear_exactness(Harness& h) {
    double worst = 0.0;
    for (const NamedCase& c : linear_steady_cases()) {
        const DiscreteSpace space(
            uniform_mesh(c.problem.x_left, c.problem.x_right, 8, 1), c.problem.kind);
        const Vector u = solve_primal(space, c.problem);
        const FinePair pair = build_fine_pair(space, c.problem, c.output, u);
        const ErrorReport report = primal_estimate(pair, c.problem);
        const double truth = fine_truth(pair, c.problem, c.output);
        worst = std::max(worst, std::abs(report.estimate - truth));
    }
    h.add("linear_exactness", worst, 1e-10);
}

void check_galerkin_orthogonality(Harness& h) {
    double worst = 0.0;
    for (const NamedCase& c : linear_steady_cases()) {
        const DiscreteSpace space(
            uniform_mesh(c.problem.x_left, c.problem.x_right, 10, 1), c.problem.kind);
        const Vector u = solve_primal(space, c.problem);
        const FinePair pair = build_fine_pair(space, c.problem, c.output, u);
        const ErrorReport primal = primal_estimate(pair, c.problem);
        const ErrorReport orth = fe_orthogonalized_estimate(pair, c.problem);
        worst = std::max(worst, std::abs(primal.estimate - orth.estimate));
    }
    h.add("galerkin_orthogonality", worst, 1e-11);
}

void check_analytic_adjoint_match(Harness& h) {
    double worst = 0.0;
    {
        // upwind advection, g = 1: the discrete adjoint is exactly 1 - x
        const PrimalProblem problem = catalog_case("advection_sine").problem;
        const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 1), problem.kind);
        const Vector u = solve_primal(space, problem);
        OutputFunctional out;
        out.interior_weight = [](double, double) { return 1.0; };
        const AdjointVector adj = solve_steady_adjoint(space, problem, out, u);
        const Vector exact = space.project([](double x, double) { return 1.0 - x; });
        Vector d = adj.coefficients;
        axpy(-1.0, exact, d);
        worst = std::max(worst, inf_norm(d));
    }
    {
        // SIP diffusion, right-boundary output: the discrete adjoint is x
        const PrimalProblem problem = catalog_case("diffusion_quadratic").problem;
        const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 2), problem.kind);
        const Vector u = solve_primal(space, problem);
        OutputFunctional out;
        out.right_boundary_weight = 1.0;
        const AdjointVector adj = solve_steady_adjoint(space, problem, out, u);
        const Vector exact = space.project([](double x, double) { return x; });
        Vector d = adj.coefficients;
        axpy(-1.0, exact, d);
        worst = std::max(worst, inf_norm(d));
    }
    h.add("analytic_adjoint_match", worst, 1e-11);
}

void check_output_compatibility(Harness& h) {
    // incompatible combinations must be rejected, compatible ones accepted
    double failures = 0.0;
    {
        OutputFunctional bad;
        bad.left_derivative_weight = 1.0;
        try {
            output_compatibility_check(catalog_case("advection_unit").problem, bad);
            failures += 1.0;
        } catch (const IncompatibleOutput&) {
        }
    }
    {
        OutputFunctional ok;
        ok.right_boundary_weight = 1.0;
        ok.left_derivative_weight = 1.0;
        try {
            output_compatibility_check(catalog_case("diffusion_quadratic").problem, ok);
        } catch (const IncompatibleOutput&) {
            failures += 1.0;
        }
    }
    {
        OutputFunctional none;
        try {
            output_compatibility_check(catalog_case("advection_unit").problem, none);
            failures += 1.0;
        } catch (const IncompatibleOutput&) {
        }
    }
    h.add("output_compatibility", failures, 0.5);
}

void check_primal_dual_equivalence(Harness& h) {
    double worst = 0.0;
    for (const NamedCase& c : linear_steady_cases()) {
        const DiscreteSpace space(
            uniform_mesh(c.problem.x_left, c.problem.x_right, 8, 1), c.problem.kind);
        const Vector u = solve_primal(space, c.problem);
        const FinePair pair = build_fine_pair(space, c.problem, c.output, u);
        const Vector u_fine = fine_primal_solve(pair, c.problem);
        const ErrorReport primal = primal_estimate(pair, c.problem);
        const ErrorReport dual = dual_estimate(pair, c.problem, c.output, u_fine);
        worst = std::max(worst, std::abs(primal.estimate - dual.estimate));
    }
    h.add("primal_dual_equivalence", worst, 1e-10);
}

} // namespace

VerifyReport run_verify(unsigned long seed, const std::string& mutate) {
    Harness h;
    h.rng.seed(seed);
    h.mutate = mutate;
    check_transpose_identity(h);
    check_solve_transpose(h);
    check_quadrature(h);
    check_injection_lossless(h);
    check_fd_jacobian(h);
    check_inverse_row_oracle(h);
    check_dual_form_steady(h);
    check_dual_form_unsteady(h);
    check_march_vs_monolithic(h);
    check_checkpointing(h);
    check_linear_exactness(h);
    check_galerkin_orthogonality(h);
    check_primal_dual_equivalence(h);
    check_analytic_adjoint_match(h);
    check_output_compatibility(h);
    return h.report;
}

} // namespace dwrlab

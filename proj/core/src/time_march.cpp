#include "dwrlab/time_march.hpp"

#include <cmath>

namespace dwrlab {

SpaceTimeSolution march_linear(const SparseMatrix& mass, const SparseMatrix& stiffness,
                               const std::function<Vector(int)>& rhs, const Vector& initial,
                               double dt, int n_steps) {
    if (!(dt > 0.0) || n_steps < 1)
        throw InvalidBounds("march_linear: requires dt > 0 and n_steps >= 1");
    const int n = mass.rows();
    std::vector<Triplet> trip;
    for (int r = 0; r < n; ++r) {
        for (int k = mass.row_offsets()[r]; k < mass.row_offsets()[r + 1]; ++k)
            trip.push_back({r, mass.col_indices()[k], mass.values()[k] / dt});
        for (int k = stiffness.row_offsets()[r]; k < stiffness.row_offsets()[r + 1]; ++k)
            trip.push_back({r, stiffness.col_indices()[k], stiffness.values()[k]});
    }
    const SparseMatrix system(n, n, std::move(trip));
    const LuFactorization lu(system);

    SpaceTimeSolution sol;
    sol.initial = initial;
    sol.dt = dt;
    sol.states.reserve(n_steps);
    Vector prev = initial;
    for (int m = 1; m <= n_steps; ++m) {
        Vector b = rhs(m);
        const Vector mprev = mass.matvec(prev);
        for (int i = 0; i < n; ++i) b[i] += mprev[i] / dt;
        Vector u = lu.solve(b);
        if (!all_finite(u))
            throw SingularMatrix("march_linear: non-finite state");
        prev = u;
        sol.states.push_back(std::move(u));
    }
    return sol;
}

SpaceTimeSolution time_march(const DiscreteSpace& space, const PrimalProblem& problem) {
    problem.validate();
    if (!is_unsteady(problem.kind))
        throw NotAvailable("time_march: steady problems use solve_primal");
    const SparseMatrix mass = mass_matrix(space);
    const Vector zero(space.n_dofs(), 0.0);
    const SparseMatrix stiffness = assemble_jacobian(space, problem, zero);
    const double dt = problem.final_time / problem.num_steps;
    auto rhs = [&](int m) { return load_vector(space, problem, m * dt); };
    const Vector u0 = space.project(problem.initial_condition);
    return march_linear(mass, stiffness, rhs, u0, dt, problem.num_steps);
}

Vector unsteady_residual_step(const DiscreteSpace& space, const PrimalProblem& problem,
                              const SpaceTimeSolution& traj, int m) {
    if (m < 1 || m > traj.n_steps())
        throw DimensionMismatch("unsteady_residual_step: step index out of range");
    const SparseMatrix mass = mass_matrix(space);
    const double dt = traj.dt;
    Vector r = assemble_residual(space, problem, traj.at(m), m * dt);
    Vector diff = traj.at(m);
    axpy(-1.0, traj.at(m - 1), diff);
    const Vector md = mass.matvec(diff);
    axpy(1.0 / dt, md, r);
    return r;
}

double output_step_weight(const OutputFunctional& output, double dt, int step, int n_steps) {
    const double t = step * dt;
    if (output.time_begin == output.time_end) {
        // instantaneous output at the matching step time
        return std::abs(t - output.time_end) <= 1e-9 * std::max(1.0, std::abs(t)) ? 1.0 : 0.0;
    }
    const double t_prev = (step - 1) * dt;
    const double tol = 1e-9 * dt * n_steps;
    return (t_prev >= output.time_begin - tol && t <= output.time_end + tol) ? dt : 0.0;
}

double evaluate_unsteady_output(const DiscreteSpace& space, const PrimalProblem& problem,
                                const OutputFunctional& output, const SpaceTimeSolution& traj) {
    double j = 0.0;
    for (int m = 1; m <= traj.n_steps(); ++m) {
        const double w = output_step_weight(output, traj.dt, m, traj.n_steps());
        if (w != 0.0)
            j += w * evaluate_output(space, problem, output, traj.at(m), m * traj.dt);
    }
    return j;
}

std::vector<Vector> unsteady_output_linearization(const DiscreteSpace& space,
                                                  const PrimalProblem& problem,
                                                  const OutputFunctional& output,
                                                  const SpaceTimeSolution& traj) {
    std::vector<Vector> g(traj.n_steps());
    for (int m = 1; m <= traj.n_steps(); ++m) {
        const double w = output_step_weight(output, traj.dt, m, traj.n_steps());
        if (w != 0.0) {
            g[m - 1] = output_linearization(space, problem, output, traj.at(m), m * traj.dt);
            for (double& v : g[m - 1]) v *= w;
        } else {
            g[m - 1].assign(space.n_dofs(), 0.0);
        }
    }
    return g;
}

} // namespace dwrlab

#include "dwrlab/adjoint.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>

#include "dwrlab/io.hpp"

namespace dwrlab {

std::size_t state_fingerprint(const Vector& u) {
    std::size_t h = 1469598103934665603ull; // FNV-1a over the raw bytes
    for (double v : u) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 1099511628211ull;
        }
    }
    return h;
}

AdjointVector solve_steady_adjoint(const DiscreteSpace& space, const PrimalProblem& problem,
                                   const OutputFunctional& output, const Vector& u) {
    const SparseMatrix jac = assemble_jacobian(space, problem, u);
    const Vector g = output_linearization(space, problem, output, u);
    AdjointVector adj;
    adj.coefficients = solve_transpose(jac, g);
    adj.state_fingerprint = state_fingerprint(u);
    Vector res = jac.matvec_transpose(adj.coefficients);
    axpy(-1.0, g, res);
    if (inf_norm(res) > 1e-11 * std::max(1.0, inf_norm(g)))
        throw SingularMatrix("solve_steady_adjoint: transpose residual tolerance not met");
    return adj;
}

AdjointVector inverse_row_oracle(const DiscreteSpace& space, const PrimalProblem& problem,
                                 const OutputFunctional& output) {
    if (problem.kind == ProblemKind::SteadyBurgers)
        throw NotAvailable("inverse_row_oracle: linear problems only");
    const int n = space.n_dofs();
    if (n > 400)
        throw SizeLimitExceeded("inverse_row_oracle: N <= 400");
    const Vector zero(n, 0.0);
    const SparseMatrix a = assemble_jacobian(space, problem, zero);
    const LuFactorization lu(a);
    // Columns of A^{-1} via N forward solves; rows recovered from columns.
    std::vector<Vector> inv_columns(n);
    for (int k = 0; k < n; ++k) {
        Vector e(n, 0.0);
        e[k] = 1.0;
        inv_columns[k] = lu.solve(e);
    }
    const Vector g = output_linearization(space, problem, output, zero);
    AdjointVector adj;
    adj.coefficients.assign(n, 0.0);
    // Psi^T = G^T A^{-1}: the G-weighted average of the rows of A^{-1}.
    for (int col = 0; col < n; ++col) {
        double s = 0.0;
        for (int row = 0; row < n; ++row) s += g[row] * inv_columns[col][row];
        adj.coefficients[col] = s;
    }
    adj.state_fingerprint = state_fingerprint(zero);
    return adj;
}

SpaceTimeAdjoint adjoint_march_linear(const SparseMatrix& mass, const SparseMatrix& stiffness,
                                      const std::vector<Vector>& rhs, double dt) {
    const int n = mass.rows();
    const int n_steps = static_cast<int>(rhs.size());
    std::vector<Triplet> trip;
    for (int r = 0; r < n; ++r) {
        for (int k = mass.row_offsets()[r]; k < mass.row_offsets()[r + 1]; ++k)
            trip.push_back({r, mass.col_indices()[k], mass.values()[k] / dt});
        for (int k = stiffness.row_offsets()[r]; k < stiffness.row_offsets()[r + 1]; ++k)
            trip.push_back({r, stiffness.col_indices()[k], stiffness.values()[k]});
    }
    const SparseMatrix system(n, n, std::move(trip));
    const LuFactorization lu(system);

    SpaceTimeAdjoint adj;
    adj.dt = dt;
    adj.states.assign(n_steps, Vector());
    Vector next; // Psi^{m+1}
    for (int m = n_steps; m >= 1; --m) {
        Vector b = rhs[m - 1];
        if (!next.empty()) {
            const Vector carry = mass.matvec_transpose(next);
            axpy(1.0 / dt, carry, b);
        }
        Vector psi = lu.solve_transpose(b);
        if (!all_finite(psi))
            throw SingularMatrix("adjoint_march_linear: non-finite adjoint");
        adj.states[m - 1] = psi;
        next = std::move(psi);
    }
    return adj;
}

SpaceTimeAdjoint solve_unsteady_adjoint(const DiscreteSpace& space, const PrimalProblem& problem,
                                        const OutputFunctional& output,
                                        const SpaceTimeSolution& trajectory) {
    if (trajectory.n_steps() < 1)
        throw MissingTrajectory("solve_unsteady_adjoint: empty trajectory");
    const SparseMatrix mass = mass_matrix(space);
    const Vector zero(space.n_dofs(), 0.0);
    const SparseMatrix stiffness = assemble_jacobian(space, problem, zero);
    const std::vector<Vector> rhs =
        unsteady_output_linearization(space, problem, output, trajectory);
    return adjoint_march_linear(mass, stiffness, rhs, trajectory.dt);
}

SparseMatrix spacetime_operator(const SparseMatrix& mass, const SparseMatrix& stiffness,
                                double dt, int n_steps) {
    const int n = mass.rows();
    std::vector<Triplet> trip;
    for (int m = 0; m < n_steps; ++m) {
        const int row0 = m * n;
        for (int r = 0; r < n; ++r) {
            for (int k = mass.row_offsets()[r]; k < mass.row_offsets()[r + 1]; ++k) {
                trip.push_back({row0 + r, row0 + mass.col_indices()[k], mass.values()[k] / dt});
                if (m > 0)
                    trip.push_back({row0 + r, row0 - n + mass.col_indices()[k],
                                    -mass.values()[k] / dt});
            }
            for (int k = stiffness.row_offsets()[r]; k < stiffness.row_offsets()[r + 1]; ++k)
                trip.push_back({row0 + r, row0 + stiffness.col_indices()[k],
                                stiffness.values()[k]});
        }
    }
    return SparseMatrix(n * n_steps, n * n_steps, std::move(trip));
}

SpaceTimeAdjoint monolithic_spacetime_adjoint(const DiscreteSpace& space,
                                              const PrimalProblem& problem,
                                              const OutputFunctional& output,
                                              const SpaceTimeSolution& trajectory) {
    const int n = space.n_dofs();
    const int n_steps = trajectory.n_steps();
    if (static_cast<long>(n) * n_steps > 20000)
        throw SizeLimitExceeded("monolithic_spacetime_adjoint: N * N_t <= 20000");
    const SparseMatrix mass = mass_matrix(space);
    const Vector zero(n, 0.0);
    const SparseMatrix stiffness = assemble_jacobian(space, problem, zero);
    const SparseMatrix big = spacetime_operator(mass, stiffness, trajectory.dt, n_steps);
    const std::vector<Vector> g =
        unsteady_output_linearization(space, problem, output, trajectory);
    Vector rhs(n * n_steps, 0.0);
    for (int m = 0; m < n_steps; ++m)
        for (int i = 0; i < n; ++i) rhs[m * n + i] = g[m][i];
    const Vector psi = solve_transpose(big, rhs);
    SpaceTimeAdjoint adj;
    adj.dt = trajectory.dt;
    adj.states.assign(n_steps, Vector(n, 0.0));
    for (int m = 0; m < n_steps; ++m)
        for (int i = 0; i < n; ++i) adj.states[m][i] = psi[m * n + i];
    return adj;
}

SpaceTimeAdjoint solve_unsteady_adjoint_checkpointed(const DiscreteSpace& space,
                                                     const PrimalProblem& problem,
                                                     const OutputFunctional& output,
                                                     int checkpoint_interval,
                                                     CheckpointStats* stats) {
    if (checkpoint_interval < 1)
        throw InvalidBounds("checkpointed adjoint: interval must be >= 1");
    problem.validate();
    const int n_steps = problem.num_steps;
    const double dt = problem.final_time / n_steps;
    const int n = space.n_dofs();

    const SparseMatrix mass = mass_matrix(space);
    const Vector zero(n, 0.0);
    const SparseMatrix stiffness = assemble_jacobian(space, problem, zero);
    std::vector<Triplet> trip;
    for (int r = 0; r < n; ++r) {
        for (int k = mass.row_offsets()[r]; k < mass.row_offsets()[r + 1]; ++k)
            trip.push_back({r, mass.col_indices()[k], mass.values()[k] / dt});
        for (int k = stiffness.row_offsets()[r]; k < stiffness.row_offsets()[r + 1]; ++k)
            trip.push_back({r, stiffness.col_indices()[k], stiffness.values()[k]});
    }
    const SparseMatrix system(n, n, std::move(trip));
    const LuFactorization lu(system);

    auto step_forward = [&](const Vector& prev, int m) {
        Vector b = load_vector(space, problem, m * dt);
        const Vector mp = mass.matvec(prev);
        for (int i = 0; i < n; ++i) b[i] += mp[i] / dt;
        return lu.solve(b);
    };

    // forward march, storing checkpoints (multiples of k) and the final state
    std::vector<std::pair<int, Vector>> checkpoints; // (step index, state)
    Vector u0 = space.project(problem.initial_condition);
    checkpoints.emplace_back(0, u0);
    Vector prev = std::move(u0);
    for (int m = 1; m <= n_steps; ++m) {
        Vector u = step_forward(prev, m);
        if (m % checkpoint_interval == 0 || m == n_steps) checkpoints.emplace_back(m, u);
        prev = std::move(u);
    }
    if (stats) {
        stats->stored_states = static_cast<int>(checkpoints.size()) - 1; // U^0 excluded
        stats->recomputed_steps = 0;
    }

    // backward march, recomputing the segment between checkpoints on demand
    SpaceTimeAdjoint adj;
    adj.dt = dt;
    adj.states.assign(n_steps, Vector());
    Vector next;
    int seg_idx = static_cast<int>(checkpoints.size()) - 1;
    int seg_lo = 0, seg_hi = -1; // states available for steps in (seg_lo, seg_hi]
    std::vector<Vector> segment_states;

    for (int m = n_steps; m >= 1; --m) {
        if (!(m > seg_lo && m <= seg_hi)) {
            while (seg_idx > 0 && checkpoints[seg_idx - 1].first >= m) --seg_idx;
            seg_lo = checkpoints[seg_idx - 1].first;
            seg_hi = checkpoints[seg_idx].first;
            segment_states.assign(seg_hi - seg_lo, Vector());
            Vector cur = checkpoints[seg_idx - 1].second;
            for (int s = seg_lo + 1; s < seg_hi; ++s) {
                cur = step_forward(cur, s);
                if (stats) ++stats->recomputed_steps;
                segment_states[s - seg_lo - 1] = cur;
            }
            segment_states[seg_hi - seg_lo - 1] = checkpoints[seg_idx].second;
        }
        const Vector& um = segment_states[m - seg_lo - 1];
        const double w = output_step_weight(output, dt, m, n_steps);
        Vector b(n, 0.0);
        if (w != 0.0) {
            b = output_linearization(space, problem, output, um, m * dt);
            for (double& v : b) v *= w;
        }
        if (!next.empty()) {
            const Vector carry = mass.matvec_transpose(next);
            axpy(1.0 / dt, carry, b);
        }
        Vector psi = lu.solve_transpose(b);
        adj.states[m - 1] = psi;
        next = std::move(psi);
    }
    return adj;
}

AdjointVector smoothed_fine_adjoint(const DiscreteSpace& fine_space,
                                    const PrimalProblem& problem,
                                    const OutputFunctional& output, const Vector& u_fine,
                                    const Vector& injected_coarse_adjoint, int sweeps) {
    const SparseMatrix jac = assemble_jacobian(fine_space, problem, u_fine);
    const Vector g = output_linearization(fine_space, problem, output, u_fine);
    const SparseMatrix jac_t = jac.transposed();

    // factor the element-diagonal blocks of J^T once
    const int ne = fine_space.n_elements();
    std::vector<LuFactorization> blocks;
    blocks.reserve(ne);
    for (int e = 0; e < ne; ++e) {
        const int base = fine_space.dof_start(e);
        const int nl = fine_space.n_local(e);
        std::vector<Triplet> trip;
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j) {
                const double v = jac_t.coeff(base + i, base + j);
                if (v != 0.0 || i == j) trip.push_back({i, j, v});
            }
        blocks.emplace_back(SparseMatrix(nl, nl, std::move(trip)));
    }

    // backward block Gauss-Seidel: adjoint information enters at the output
    // and propagates upstream, so sweeping elements last-to-first converges
    // in one pass for pure advection and rapidly otherwise
    Vector psi = injected_coarse_adjoint;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int e = ne - 1; e >= 0; --e) {
            const int base = fine_space.dof_start(e);
            const int nl = fine_space.n_local(e);
            Vector res(nl, 0.0);
            for (int i = 0; i < nl; ++i) {
                const int row = base + i;
                double s = g[row];
                for (int k = jac_t.row_offsets()[row]; k < jac_t.row_offsets()[row + 1]; ++k)
                    s -= jac_t.values()[k] * psi[jac_t.col_indices()[k]];
                res[i] = s;
            }
            const Vector d = blocks[e].solve(res);
            for (int i = 0; i < nl; ++i) psi[base + i] += d[i];
        }
    }
    AdjointVector adj;
    adj.coefficients = std::move(psi);
    adj.state_fingerprint = state_fingerprint(u_fine);
    return adj;
}

std::string write_spacetime_adjoint(const SpaceTimeAdjoint& adj, int n_dofs) {
    std::ostringstream os;
    os << "adjoint v1 " << n_dofs << " " << adj.n_steps() << "\n";
    for (const Vector& psi : adj.states)
        for (double v : psi) os << format_real(v) << "\n";
    return os.str();
}

SpaceTimeAdjoint read_spacetime_adjoint(const std::string& text) {
    std::istringstream is(text);
    std::string tag, version;
    int n = 0, steps = 0;
    is >> tag >> version >> n >> steps;
    if (tag != "adjoint" || version != "v1" || n < 1 || steps < 1)
        throw ParseError("read_spacetime_adjoint: bad header", 1);
    SpaceTimeAdjoint adj;
    adj.states.assign(steps, Vector(n, 0.0));
    for (int m = 0; m < steps; ++m)
        for (int i = 0; i < n; ++i)
            if (!(is >> adj.states[m][i]))
                throw ParseError("read_spacetime_adjoint: truncated", m + 2);
    return adj;
}

} // namespace dwrlab

#pragma once

#include "dwrlab/time_march.hpp"

namespace dwrlab {

/// Discrete adjoint with the fingerprint of the linearization state.
struct AdjointVector {
    Vector coefficients;
    std::size_t state_fingerprint = 0;
};

std::size_t state_fingerprint(const Vector& u);

/// Solves J(U)^T Psi = G(U) with the transposed factorization of the primal
/// Jacobian. Post: ||J^T Psi - G||_inf <= 1e-11.
AdjointVector solve_steady_adjoint(const DiscreteSpace& space, const PrimalProblem& problem,
                                   const OutputFunctional& output, const Vector& u);

/// Brute-force reference: forms A^{-1} column by column (N forward solves)
/// and left-multiplies by dJ/dU. Linear problems only, N <= 400.
AdjointVector inverse_row_oracle(const DiscreteSpace& space, const PrimalProblem& problem,
                                 const OutputFunctional& output);

/// Per-step adjoints Psi^m, m = 1..N_t.
struct SpaceTimeAdjoint {
    std::vector<Vector> states;
    double dt = 0.0;
    int n_steps() const { return static_cast<int>(states.size()); }
    const Vector& at(int m) const { return states[m - 1]; }
};

/// Generic backward march for the transposed block-bidiagonal system:
///   (M/dt + A)^T Psi^m = G^m + (M^T/dt) Psi^{m+1},  Psi^{N_t+1} = 0.
SpaceTimeAdjoint adjoint_march_linear(const SparseMatrix& mass, const SparseMatrix& stiffness,
                                      const std::vector<Vector>& rhs, double dt);

/// PDE wrapper over the stored primal trajectory.
SpaceTimeAdjoint solve_unsteady_adjoint(const DiscreteSpace& space, const PrimalProblem& problem,
                                        const OutputFunctional& output,
                                        const SpaceTimeSolution& trajectory);

/// Assembles the full lower-bidiagonal space-time operator and solves its
/// transpose in one shot; the oracle for the backward march. N * N_t <= 20000.
SpaceTimeAdjoint monolithic_spacetime_adjoint(const DiscreteSpace& space,
                                              const PrimalProblem& problem,
                                              const OutputFunctional& output,
                                              const SpaceTimeSolution& trajectory);

/// The full space-time operator itself (block m,m and m,m-1 sparsity);
/// exposed for tests that check the forward solve against the time march.
SparseMatrix spacetime_operator(const SparseMatrix& mass, const SparseMatrix& stiffness,
                                double dt, int n_steps);

struct CheckpointStats {
    int stored_states = 0;
    int recomputed_steps = 0;
};

/// Forward march storing states only at multiples of the checkpoint
/// interval (plus the final state), recomputing segments during the
/// backward adjoint march. Identical arithmetic path per step, so the
/// result matches the full-storage adjoint to roundoff.
SpaceTimeAdjoint solve_unsteady_adjoint_checkpointed(const DiscreteSpace& space,
                                                     const PrimalProblem& problem,
                                                     const OutputFunctional& output,
                                                     int checkpoint_interval,
                                                     CheckpointStats* stats = nullptr);

/// Approximate fine-space adjoint: injected coarse adjoint plus damped
/// block-Jacobi sweeps on the transposed fine system.
AdjointVector smoothed_fine_adjoint(const DiscreteSpace& fine_space,
                                    const PrimalProblem& problem,
                                    const OutputFunctional& output, const Vector& u_fine,
                                    const Vector& injected_coarse_adjoint, int sweeps);

/// Serialization: "adjoint v1 <N> <N_t>" then step-major coefficients.
std::string write_spacetime_adjoint(const SpaceTimeAdjoint& adj, int n_dofs);
SpaceTimeAdjoint read_spacetime_adjoint(const std::string& text);

} // namespace dwrlab

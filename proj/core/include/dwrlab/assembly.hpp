#pragma once

#include "dwrlab/linalg.hpp"
#include "dwrlab/problems.hpp"
#include "dwrlab/space.hpp"

namespace dwrlab {

/// Spatial DG residual R(U) at time t (steady problems ignore t).
/// Sign convention: R(U) = (discrete L u) - (discrete data), zero at the
/// discrete solution. Advection uses full upwinding with the Dirichlet
/// inflow imposed through the upwind flux; diffusion uses symmetric
/// interior penalty; Burgers uses a local Lax-Friedrichs flux plus the
/// cubic volume source.
Vector assemble_residual(const DiscreteSpace& space, const PrimalProblem& problem,
                         const Vector& u, double t = 0.0);

/// Exact analytic linearization of assemble_residual at u. For the linear
/// variants the result is state-independent.
SparseMatrix assemble_jacobian(const DiscreteSpace& space, const PrimalProblem& problem,
                               const Vector& u);

/// Block-diagonal DG mass matrix.
SparseMatrix mass_matrix(const DiscreteSpace& space);

/// Discrete data vector F(t) = -R(0; t): source plus boundary data terms.
Vector load_vector(const DiscreteSpace& space, const PrimalProblem& problem, double t = 0.0);

/// Spatial output value at a single state.
double evaluate_output(const DiscreteSpace& space, const PrimalProblem& problem,
                       const OutputFunctional& output, const Vector& u, double t = 0.0);

/// Exact gradient of evaluate_output with respect to the coefficients.
Vector output_linearization(const DiscreteSpace& space, const PrimalProblem& problem,
                            const OutputFunctional& output, const Vector& u, double t = 0.0);

struct SolveReport {
    int newton_iterations = 0;
    double residual_norm = 0.0;
};

/// Steady solve: one linear solve for the linear variants, Newton with the
/// analytic Jacobian for Burgers (initial guess u = u_L, absolute tolerance
/// 1e-12, at most 50 iterations).
Vector solve_primal(const DiscreteSpace& space, const PrimalProblem& problem,
                    SolveReport* report = nullptr);

} // namespace dwrlab

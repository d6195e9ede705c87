#pragma once

#include <functional>
#include <vector>

#include "dwrlab/assembly.hpp"

namespace dwrlab {

/// Backward-Euler trajectory: initial state plus one state per step.
/// states[m-1] holds U^m at time m * dt, m = 1..N_t.
struct SpaceTimeSolution {
    Vector initial;
    std::vector<Vector> states;
    double dt = 0.0;
    int n_steps() const { return static_cast<int>(states.size()); }
    const Vector& at(int m) const { return m == 0 ? initial : states[m - 1]; }
};

/// Generic linear backward-Euler kernel:
///   M (U^m - U^{m-1})/dt + A U^m = F(m)   for m = 1..n_steps.
SpaceTimeSolution march_linear(const SparseMatrix& mass, const SparseMatrix& stiffness,
                               const std::function<Vector(int)>& rhs, const Vector& initial,
                               double dt, int n_steps);

/// PDE wrapper: projects the initial condition, assembles M and A once,
/// and marches. Per-step unsteady residual of the result is at most 1e-11.
SpaceTimeSolution time_march(const DiscreteSpace& space, const PrimalProblem& problem);

/// Unsteady residual of step m (1-based): M (U^m - U^{m-1})/dt + A U^m - F^m.
Vector unsteady_residual_step(const DiscreteSpace& space, const PrimalProblem& problem,
                              const SpaceTimeSolution& traj, int m);

/// Time-integrated output: rectangle weights dt per step whose interval lies
/// in [t_begin, t_end]; instantaneous when t_begin == t_end (value taken at
/// the matching step).
double evaluate_unsteady_output(const DiscreteSpace& space, const PrimalProblem& problem,
                                const OutputFunctional& output, const SpaceTimeSolution& traj);

/// d(output)/dU^m for m = 1..N_t.
std::vector<Vector> unsteady_output_linearization(const DiscreteSpace& space,
                                                  const PrimalProblem& problem,
                                                  const OutputFunctional& output,
                                                  const SpaceTimeSolution& traj);

/// Step weight of the output's time quadrature: dt for covered steps, 1 for
/// the instantaneous step, 0 otherwise.
double output_step_weight(const OutputFunctional& output, double dt, int step, int n_steps);

} // namespace dwrlab

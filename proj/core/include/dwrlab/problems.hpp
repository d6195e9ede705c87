#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dwrlab/errors.hpp"

namespace dwrlab {

/// Scalar field of (x, t); steady problems ignore t.
using ScalarField = std::function<double(double, double)>;

enum class ProblemKind {
    SteadyAdvection,
    SteadyDiffusion,
    SteadyBurgers,
    UnsteadyAdvectionDiffusion,
};

bool is_unsteady(ProblemKind kind);
std::string to_string(ProblemKind kind);

/// The PDE under study: operator coefficients, data, and boundary values.
struct PrimalProblem {
    ProblemKind kind = ProblemKind::SteadyAdvection;
    double x_left = 0.0;
    double x_right = 1.0;
    double advection_speed = 0.0; // a > 0 for advection variants
    double diffusivity = 0.0;     // nu > 0 for diffusion variants
    ScalarField source;           // f(x) or f(x, t)
    double dirichlet_left = 0.0;  // u_L
    double neumann_right = 0.0;   // u_x at x_R (diffusion variants)
    ScalarField initial_condition; // u0(x), unsteady only
    double final_time = 0.0;
    int num_steps = 0;

    bool has_advection() const;
    bool has_diffusion() const;
    void validate() const;
};

/// The goal quantity J: interior weight, point value, boundary weights,
/// and/or the quadratic boundary flux. Unsteady outputs carry a time window;
/// t_begin == t_end means an instantaneous output at that time.
struct OutputFunctional {
    ScalarField interior_weight;           // g(x[, t]); may be null
    std::optional<double> point_location;  // x_p, strictly interior
    double right_boundary_weight = 0.0;    // g_R on u(x_R)
    double left_derivative_weight = 0.0;   // g_L on du/dx(x_L), diffusion only
    bool quadratic_flux = false;           // (1/2) u^2 at x_R
    double time_begin = 0.0;
    double time_end = 0.0;

    bool any_active() const;
    bool is_linear() const { return !quadratic_flux; }
};

/// Closed-form solution data for catalog cases.
struct AnalyticSolution {
    ScalarField u;                         // primal, u(x) or u(x, t)
    ScalarField u_x;                       // du/dx, exact where available
    ScalarField u_xx;                      // d2u/dx2, exact where available
    std::function<double(double)> adjoint; // psi(x) where available
    std::optional<double> output;          // exact J where available
};

/// Checks that the output only involves quantities not already fixed by the
/// boundary conditions. Throws IncompatibleOutput naming the violated rule.
void output_compatibility_check(const PrimalProblem& problem, const OutputFunctional& output);

/// Closed-form primal solution for catalog problems; throws NotAvailable.
AnalyticSolution analytic_primal(const PrimalProblem& problem);

/// Closed-form continuous adjoint for linear catalog problems and the given
/// output; throws NotAvailable.
AnalyticSolution analytic_adjoint(const PrimalProblem& problem, const OutputFunctional& output);

/// Exact output of a catalog (problem, output) pair computed from the
/// analytic solution by high-order quadrature. Throws NotAvailable.
double analytic_output(const PrimalProblem& problem, const OutputFunctional& output);

/// Dual form of the output for linear advection: (psi, f) + psi(x_L) a u_L.
double dual_form_value(const PrimalProblem& problem, const OutputFunctional& output,
                       const std::function<double(double)>& psi);

/// Continuous residual r(u) = Lu - f evaluated pointwise. Uses the exact
/// derivative fields when present, finite differences otherwise.
double continuous_residual(const PrimalProblem& problem, const AnalyticSolution& sol, double x);

/// Fixed, versioned manufactured-solution catalog.
struct CatalogCase {
    std::string id;
    PrimalProblem problem;
    AnalyticSolution solution;
};

const std::vector<CatalogCase>& catalog();
const CatalogCase& catalog_case(const std::string& id);

} // namespace dwrlab

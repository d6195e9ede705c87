#include "dwrlab/error_estimate.hpp"

#include <cmath>
#include <sstream>

#include "dwrlab/io.hpp"

namespace dwrlab {

std::string to_string(EstimateForm form) {
    switch (form) {
        case EstimateForm::Primal: return "primal";
        case EstimateForm::FeOrthogonalized: return "fe_orthogonalized";
        case EstimateForm::Dual: return "dual";
        case EstimateForm::ThirdOrder: return "third_order";
    }
    return "?";
}

FinePair build_fine_pair(const DiscreteSpace& coarse, const PrimalProblem& problem,
                         const OutputFunctional& output, const Vector& u_coarse,
                         const FinePairOptions& options) {
    FinePair pair;
    pair.coarse = coarse;
    pair.fine = options.fine_mode == FineSpaceMode::PEnrich ? enrich_space(coarse)
                                                            : refine_space_uniform(coarse);
    pair.injection = space_injection(pair.coarse, pair.fine);
    pair.u_coarse = u_coarse;
    pair.u_injected = pair.injection.apply(u_coarse);
    pair.coarse_adjoint =
        solve_steady_adjoint(coarse, problem, output, u_coarse).coefficients;
    pair.injected_coarse_adjoint = pair.injection.apply(pair.coarse_adjoint);
    if (options.adjoint_mode == AdjointSolveMode::Exact) {
        pair.fine_adjoint = solve_steady_adjoint(pair.fine, problem, output, pair.u_injected);
    } else {
        pair.fine_adjoint =
            smoothed_fine_adjoint(pair.fine, problem, output, pair.u_injected,
                                  pair.injected_coarse_adjoint, options.smoothing_sweeps);
    }
    return pair;
}

namespace {

/// Restrict a fine-DOF dot product to elements, then accumulate onto coarse
/// parents. Global estimate == sum of signed contributions by construction.
ErrorReport localize(const FinePair& pair, const Vector& weights, const Vector& residual,
                     EstimateForm form, double scale = -1.0) {
    if (weights.size() != residual.size())
        throw DimensionMismatch("localize: weight/residual size mismatch");
    ErrorReport report;
    report.form = form;
    report.n_elements = pair.coarse.n_elements();
    report.signed_contribution.assign(report.n_elements, 0.0);
    for (int ef = 0; ef < pair.fine.n_elements(); ++ef) {
        double s = 0.0;
        const int base = pair.fine.dof_start(ef);
        for (int j = 0; j < pair.fine.n_local(ef); ++j)
            s += weights[base + j] * residual[base + j];
        report.signed_contribution[pair.injection.fine_to_coarse[ef]] += scale * s;
    }
    report.indicator.resize(report.n_elements);
    double total = 0.0;
    for (int e = 0; e < report.n_elements; ++e) {
        total += report.signed_contribution[e];
        report.indicator[e] = std::abs(report.signed_contribution[e]);
    }
    report.estimate = total;
    return report;
}

} // namespace

ErrorReport primal_estimate(const FinePair& pair, const PrimalProblem& problem) {
    const Vector residual = assemble_residual(pair.fine, problem, pair.u_injected);
    return localize(pair, pair.fine_adjoint.coefficients, residual, EstimateForm::Primal);
}

ErrorReport fe_orthogonalized_estimate(const FinePair& pair, const PrimalProblem& problem) {
    const Vector residual = assemble_residual(pair.fine, problem, pair.u_injected);
    Vector weights = pair.fine_adjoint.coefficients;
    axpy(-1.0, pair.injected_coarse_adjoint, weights);
    return localize(pair, weights, residual, EstimateForm::FeOrthogonalized);
}

Vector adjoint_residual(const DiscreteSpace& fine_space, const PrimalProblem& problem,
                        const OutputFunctional& output, const Vector& psi, const Vector& u) {
    const SparseMatrix jac = assemble_jacobian(fine_space, problem, u);
    const Vector g = output_linearization(fine_space, problem, output, u);
    Vector r = jac.matvec_transpose(psi);
    axpy(-1.0, g, r);
    return r;
}

ErrorReport dual_estimate(const FinePair& pair, const PrimalProblem& problem,
                          const OutputFunctional& output, const Vector& u_surrogate) {
    const Vector rstar = adjoint_residual(pair.fine, problem, output,
                                          pair.injected_coarse_adjoint, pair.u_injected);
    return localize(pair, rstar, u_surrogate, EstimateForm::Dual);
}

ErrorReport third_order_estimate(const FinePair& pair, const PrimalProblem& problem,
                                 const OutputFunctional& output, const Vector& u_surrogate) {
    const Vector residual = assemble_residual(pair.fine, problem, pair.u_injected);
    // the psi - psi_H weight needs the adjoint of the *surrogate* state:
    // linearizing about U_h^H instead would reintroduce an O(dU^2) remainder
    const Vector psi_surrogate =
        solve_steady_adjoint(pair.fine, problem, output, u_surrogate).coefficients;
    Vector adj_diff = psi_surrogate;
    axpy(-1.0, pair.injected_coarse_adjoint, adj_diff);
    const ErrorReport primal_half =
        localize(pair, adj_diff, residual, EstimateForm::ThirdOrder, -0.5);

    const Vector rstar = adjoint_residual(pair.fine, problem, output,
                                          pair.injected_coarse_adjoint, pair.u_injected);
    Vector state_diff = u_surrogate;
    axpy(-1.0, pair.u_injected, state_diff);
    const ErrorReport dual_half =
        localize(pair, rstar, state_diff, EstimateForm::ThirdOrder, -0.5);

    ErrorReport report = primal_half;
    report.estimate += dual_half.estimate;
    for (int e = 0; e < report.n_elements; ++e) {
        report.signed_contribution[e] += dual_half.signed_contribution[e];
        report.indicator[e] = std::abs(report.signed_contribution[e]);
    }
    return report;
}

double effectivity(const ErrorReport& report, double truth) {
    if (std::abs(truth) <= 1e-14)
        throw TruthTooSmall("effectivity: |truth| <= 1e-14");
    return report.estimate / truth;
}

Vector fine_primal_solve(const FinePair& pair, const PrimalProblem& problem) {
    return solve_primal(pair.fine, problem);
}

double fine_truth(const FinePair& pair, const PrimalProblem& problem,
                  const OutputFunctional& output) {
    const Vector u_fine = fine_primal_solve(pair, problem);
    const double j_fine = evaluate_output(pair.fine, problem, output, u_fine);
    const double j_coarse = evaluate_output(pair.coarse, problem, output, pair.u_coarse);
    return j_fine - j_coarse;
}

Vector smoothed_fine_state(const FinePair& pair, const PrimalProblem& problem, int sweeps) {
    Vector u = pair.u_injected;
    for (int s = 0; s < sweeps; ++s) {
        Vector r = assemble_residual(pair.fine, problem, u);
        for (double& v : r) v = -v;
        const SparseMatrix jac = assemble_jacobian(pair.fine, problem, u);
        const Vector du = solve(jac, r);
        axpy(1.0, du, u);
        if (problem.kind != ProblemKind::SteadyBurgers) break; // linear: one solve is exact
    }
    return u;
}

namespace {

struct UnsteadyContributions {
    // signed contribution per coarse (element, step): index m * ne + e
    std::vector<double> signed_contribution;
    double estimate = 0.0;
};

/// Shared kernel for the full and semi-refined unsteady estimates.
/// time_factor in {1, 2}: fine steps per coarse step. difference_weights
/// subtracts the injected coarse adjoint from the fine one.
UnsteadyContributions unsteady_contributions(const DiscreteSpace& coarse,
                                             const PrimalProblem& problem,
                                             const OutputFunctional& output,
                                             const SpaceTimeSolution& trajectory,
                                             const DiscreteSpace& fine, int time_factor,
                                             bool difference_weights,
                                             const SpaceTimeAdjoint* coarse_adjoint) {
    const int ne = coarse.n_elements();
    const int n_coarse_steps = trajectory.n_steps();
    const int n_fine_steps = n_coarse_steps * time_factor;
    const double dt_f = trajectory.dt / time_factor;

    PrimalProblem fine_problem = problem;
    fine_problem.num_steps = n_fine_steps;

    const InjectionOperator injection = space_injection(coarse, fine);

    // injected trajectory: piecewise-constant in time, nodal in space;
    // the fine system's own initial projection enters the step-1 residual
    SpaceTimeSolution injected;
    injected.dt = dt_f;
    injected.initial = fine.project(problem.initial_condition);
    injected.states.resize(n_fine_steps);
    for (int k = 1; k <= n_fine_steps; ++k)
        injected.states[k - 1] = injection.apply(trajectory.at((k + time_factor - 1) / time_factor));

    const SpaceTimeAdjoint fine_adjoint =
        solve_unsteady_adjoint(fine, fine_problem, output, injected);

    const SparseMatrix mass = mass_matrix(fine);
    const Vector zero(fine.n_dofs(), 0.0);
    const SparseMatrix stiffness = assemble_jacobian(fine, fine_problem, zero);

    UnsteadyContributions out;
    out.signed_contribution.assign(static_cast<std::size_t>(ne) * n_coarse_steps, 0.0);

    for (int k = 1; k <= n_fine_steps; ++k) {
        // residual of the injected trajectory at fine step k
        Vector r = stiffness.matvec(injected.at(k));
        const Vector f = load_vector(fine, fine_problem, k * dt_f);
        axpy(-1.0, f, r);
        Vector diff = injected.at(k);
        axpy(-1.0, injected.at(k - 1), diff);
        const Vector md = mass.matvec(diff);
        axpy(1.0 / dt_f, md, r);

        Vector w = fine_adjoint.at(k);
        if (difference_weights) {
            const int m = (k + time_factor - 1) / time_factor;
            Vector inj = injection.apply(coarse_adjoint->at(m));
            axpy(-1.0 / time_factor, inj, w);
        }

        const int m = (k + time_factor - 1) / time_factor;
        for (int ef = 0; ef < fine.n_elements(); ++ef) {
            double s = 0.0;
            const int base = fine.dof_start(ef);
            for (int j = 0; j < fine.n_local(ef); ++j) s += w[base + j] * r[base + j];
            out.signed_contribution[static_cast<std::size_t>(m - 1) * ne +
                                    injection.fine_to_coarse[ef]] += -s;
        }
    }
    for (double v : out.signed_contribution) out.estimate += v;
    return out;
}

} // namespace

UnsteadyFineResult unsteady_estimate(const DiscreteSpace& coarse, const PrimalProblem& problem,
                                     const OutputFunctional& output,
                                     const SpaceTimeSolution& trajectory,
                                     const UnsteadyEstimateOptions& options) {
    const int ne = coarse.n_elements();
    const int n_steps = trajectory.n_steps();
    const DiscreteSpace fine_space = options.fine_mode == FineSpaceMode::PEnrich
                                         ? enrich_space(coarse)
                                         : refine_space_uniform(coarse);

    const UnsteadyContributions full = unsteady_contributions(
        coarse, problem, output, trajectory, fine_space, 2, false, nullptr);

    UnsteadyFineResult result;
    result.report.form = EstimateForm::Primal;
    result.report.n_elements = ne;
    result.report.n_steps = n_steps;
    result.report.signed_contribution = full.signed_contribution;
    result.report.estimate = full.estimate;
    result.report.indicator.resize(full.signed_contribution.size());
    for (std::size_t i = 0; i < full.signed_contribution.size(); ++i)
        result.report.indicator[i] = std::abs(full.signed_contribution[i]);
    result.coarse_output = evaluate_unsteady_output(coarse, problem, output, trajectory);

    if (options.with_anisotropy) {
        const SpaceTimeAdjoint coarse_adjoint =
            solve_unsteady_adjoint(coarse, problem, output, trajectory);
        const UnsteadyContributions space_only = unsteady_contributions(
            coarse, problem, output, trajectory, fine_space, 1, true, &coarse_adjoint);
        const UnsteadyContributions time_only = unsteady_contributions(
            coarse, problem, output, trajectory, coarse, 2, true, &coarse_adjoint);
        result.report.beta_space.resize(full.signed_contribution.size());
        for (std::size_t i = 0; i < full.signed_contribution.size(); ++i) {
            const double es = std::abs(space_only.signed_contribution[i]);
            const double et = std::abs(time_only.signed_contribution[i]);
            result.report.beta_space[i] = (es + et == 0.0) ? 0.5 : es / (es + et);
        }
    }
    return result;
}

double unsteady_fine_truth(const DiscreteSpace& coarse, const PrimalProblem& problem,
                           const OutputFunctional& output, const SpaceTimeSolution& trajectory,
                           FineSpaceMode mode) {
    const DiscreteSpace fine_space =
        mode == FineSpaceMode::PEnrich ? enrich_space(coarse) : refine_space_uniform(coarse);
    PrimalProblem fine_problem = problem;
    fine_problem.num_steps = trajectory.n_steps() * 2;
    const SpaceTimeSolution fine_traj = time_march(fine_space, fine_problem);
    const double j_fine = evaluate_unsteady_output(fine_space, fine_problem, output, fine_traj);
    const double j_coarse = evaluate_unsteady_output(coarse, problem, output, trajectory);
    return j_fine - j_coarse;
}

std::string write_error_report_csv(const ErrorReport& report) {
    std::ostringstream os;
    const bool unsteady = report.n_steps > 0;
    os << (unsteady ? "elem,step,signed_contrib,indicator,beta_space\n"
                    : "elem,signed_contrib,indicator,beta_space\n");
    if (!unsteady) {
        for (int e = 0; e < report.n_elements; ++e)
            os << e << "," << format_real(report.signed_contribution[e]) << ","
               << format_real(report.indicator[e]) << ",NA\n";
    } else {
        for (int e = 0; e < report.n_elements; ++e) {
            for (int m = 1; m <= report.n_steps; ++m) {
                const std::size_t idx =
                    static_cast<std::size_t>(m - 1) * report.n_elements + e;
                os << e << "," << m << "," << format_real(report.signed_contribution[idx])
                   << "," << format_real(report.indicator[idx]) << ",";
                if (!report.beta_space.empty())
                    os << format_real(report.beta_space[idx]);
                else
                    os << "NA";
                os << "\n";
            }
        }
    }
    os << "total," << format_real(report.estimate) << ",effectivity,";
    if (report.effectivity)
        os << format_real(*report.effectivity);
    else
        os << "NA";
    os << "\n";
    return os.str();
}

} // namespace dwrlab

#pragma once

#include <optional>
#include <string>

#include "dwrlab/adjoint.hpp"

namespace dwrlab {

enum class FineSpaceMode { PEnrich, HRefine };
enum class AdjointSolveMode { Exact, Smoothed };

struct FinePairOptions {
    FineSpaceMode fine_mode = FineSpaceMode::PEnrich;
    AdjointSolveMode adjoint_mode = AdjointSolveMode::Exact;
    int smoothing_sweeps = 5;
};

/// Coarse solution embedded in its fine space together with the fine-space
/// adjoint and the injected coarse adjoint.
struct FinePair {
    DiscreteSpace coarse;
    DiscreteSpace fine;
    InjectionOperator injection;
    Vector u_coarse;               // U_H
    Vector u_injected;             // U_h^H
    Vector coarse_adjoint;         // Psi_H
    Vector injected_coarse_adjoint; // Psi_h^H
    AdjointVector fine_adjoint;    // Psi_h, linearized about U_h^H
};

FinePair build_fine_pair(const DiscreteSpace& coarse, const PrimalProblem& problem,
                         const OutputFunctional& output, const Vector& u_coarse,
                         const FinePairOptions& options = {});

enum class EstimateForm { Primal, FeOrthogonalized, Dual, ThirdOrder };
std::string to_string(EstimateForm form);

/// Global estimate with per-element localization. For unsteady reports the
/// entries are per (element, step) with index step * n_elements + element,
/// and the anisotropy fractions are populated.
struct ErrorReport {
    EstimateForm form = EstimateForm::Primal;
    double estimate = 0.0;
    std::vector<double> signed_contribution; // sums exactly to estimate
    std::vector<double> indicator;           // |signed contribution|
    std::optional<double> effectivity;
    int n_elements = 0;
    int n_steps = 0;                 // 0 for steady reports
    std::vector<double> beta_space;  // unsteady only; beta_time = 1 - beta_space
};

/// delta J = -Psi_h . R_h(U_h^H), localized to coarse parents.
ErrorReport primal_estimate(const FinePair& pair, const PrimalProblem& problem);

/// delta J = -(Psi_h - Psi_h^H) . R_h(U_h^H); same global value as the
/// primal form, different local indicators.
ErrorReport fe_orthogonalized_estimate(const FinePair& pair, const PrimalProblem& problem);

/// R*(Psi) = J^T(U) Psi - G(U) on the fine space.
Vector adjoint_residual(const DiscreteSpace& fine_space, const PrimalProblem& problem,
                        const OutputFunctional& output, const Vector& psi, const Vector& u);

/// delta J = -R*(Psi_h^H) . u_surrogate (u_surrogate on the fine space).
ErrorReport dual_estimate(const FinePair& pair, const PrimalProblem& problem,
                          const OutputFunctional& output, const Vector& u_surrogate);

/// delta J = -1/2 (Psi_h - Psi_h^H) . R_h(U_h^H)
///           -1/2 R*(Psi_h^H) . (u_surrogate - U_h^H).
ErrorReport third_order_estimate(const FinePair& pair, const PrimalProblem& problem,
                                 const OutputFunctional& output, const Vector& u_surrogate);

/// eta = estimate / truth; truth below 1e-14 raises TruthTooSmall.
double effectivity(const ErrorReport& report, double truth);

/// Fine-solve truth J_h(U_h) - J_H(U_H) for steady problems.
double fine_truth(const FinePair& pair, const PrimalProblem& problem,
                  const OutputFunctional& output);

/// Fine primal solve on the pair's fine space (oracle-grade u surrogate).
Vector fine_primal_solve(const FinePair& pair, const PrimalProblem& problem);

/// Smoothed u surrogate: injected coarse state plus a few Newton/Richardson
/// sweeps of the fine problem.
Vector smoothed_fine_state(const FinePair& pair, const PrimalProblem& problem, int sweeps = 5);

/// ----- unsteady estimation -----

struct UnsteadyEstimateOptions {
    FineSpaceMode fine_mode = FineSpaceMode::PEnrich;
    bool with_anisotropy = true;
};

struct UnsteadyFineResult {
    ErrorReport report;         // per (element, step) on the coarse grid
    double coarse_output = 0.0; // J_H(U_H)
};

/// Space-and-time refined primal-form estimate (order-enriched space, halved
/// steps), localized to coarse (element, step) pairs, with the space/time
/// anisotropy split computed from the two semi-refined surrogates.
UnsteadyFineResult unsteady_estimate(const DiscreteSpace& coarse, const PrimalProblem& problem,
                                     const OutputFunctional& output,
                                     const SpaceTimeSolution& trajectory,
                                     const UnsteadyEstimateOptions& options = {});

/// Fine space-time solve truth J_h - J_H for the unsteady pair.
double unsteady_fine_truth(const DiscreteSpace& coarse, const PrimalProblem& problem,
                           const OutputFunctional& output, const SpaceTimeSolution& trajectory,
                           FineSpaceMode mode = FineSpaceMode::PEnrich);

/// CSV per the report schema: elem,[step,]signed_contrib,indicator,beta_space
/// plus the footer row "total,<estimate>,effectivity,<eta|NA>".
std::string write_error_report_csv(const ErrorReport& report);

} // namespace dwrlab

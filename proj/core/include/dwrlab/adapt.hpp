#pragma once

#include <optional>

#include "dwrlab/error_estimate.hpp"

namespace dwrlab {

enum class Mark { Coarsen = -1, Keep = 0, Refine = 1 };
enum class AdaptMode { H, P };

struct AdaptationPlan {
    std::vector<Mark> spatial;  // per element (steady) or per (element, step)
    std::vector<Mark> temporal; // per step, unsteady only
    AdaptMode mode = AdaptMode::H;
    std::vector<double> scores; // figure of merit per entity (spatial then temporal)
};

/// score_i = indicator_i / dof_cost_i; the cost is the exact DOF increase
/// the marked refinement would cause.
std::vector<double> figure_of_merit(const std::vector<double>& indicators,
                                    const std::vector<double>& dof_costs);

/// Top ceil(refine_frac * n) scores marked refine, bottom floor(coarsen_frac
/// * n) marked coarsen; ties break toward the lower index.
std::vector<Mark> mark_fixed_fraction(const std::vector<double>& scores, double refine_frac,
                                      double coarsen_frac);

/// Checks the plan invariants: mark fractions within the configured bounds
/// and temporal merge marks only on adjacent pairs.
void validate_plan(const AdaptationPlan& plan, double refine_frac, double coarsen_frac);

struct AdaptiveRecord {
    int iteration = 0;
    long dofs = 0;
    double output = 0.0;
    double estimate = 0.0;
    double corrected = 0.0;
    std::optional<double> true_error;
};

struct AdaptiveHistory {
    std::vector<AdaptiveRecord> records;
    std::vector<Mesh1D> meshes; // snapshot per iteration (steady loop)
    bool converged = false;
    /// marks applied per iteration: counts of refined entities per step
    /// (unsteady loop), for adaptation-structure diagnostics
    std::vector<std::vector<int>> refined_per_step;
};

struct SteadyAdaptOptions {
    AdaptMode mode = AdaptMode::H;
    double refine_fraction = 0.2;
    double coarsen_fraction = 0.0;
    double tolerance = 1e-8;
    int max_iterations = 12;
    long dof_cap = 200000;
    FinePairOptions fine;
    bool residual_indicator = false; // baseline |R|-indicator mode
    std::optional<double> true_output;          // enables true_error records
    std::optional<double> stop_true_error;      // stop when |true error| below
    bool error_on_max_iterations = true;
};

/// Solve -> estimate -> correct -> localize -> mark -> refine loop.
AdaptiveHistory adapt_loop_steady(const DiscreteSpace& initial_space,
                                  const PrimalProblem& problem, const OutputFunctional& output,
                                  const SteadyAdaptOptions& options);

struct UnsteadyAdaptOptions {
    AdaptMode spatial_mode = AdaptMode::H;
    double refine_fraction = 0.35;
    double coarsen_fraction = 0.05;
    double tolerance = 1e-8;
    int max_iterations = 12;
    long dof_cap = 200000;
    std::optional<double> true_output;
    bool error_on_max_iterations = true;
};

/// Per-step spatial meshes and step sizes (dynamic-in-time resolution).
struct SlabDiscretization {
    std::vector<DiscreteSpace> spaces; // one per step
    std::vector<double> dts;           // one per step
    int n_steps() const { return static_cast<int>(dts.size()); }
    long total_dofs() const;
    double time_at(int m) const; // end time of step m (1-based)
};

/// Exact L2 transfer between (possibly different) slab spaces.
class L2Transfer {
public:
    L2Transfer(const DiscreteSpace& from, const DiscreteSpace& to);
    Vector apply(const Vector& v) const;
    Vector apply_transpose(const Vector& w) const;
    bool identity() const { return identity_; }

private:
    bool identity_ = false;
    SparseMatrix mixed_; // int phi_to phi_from
    std::shared_ptr<LuFactorization> mass_to_;
};

struct SlabSolution {
    Vector initial;
    std::vector<Vector> states;
};

SlabSolution march_slabs(const SlabDiscretization& slabs, const PrimalProblem& problem);

/// Forward march -> backward fine adjoint -> estimate -> anisotropy ->
/// figure of merit -> per-slab spatial marks + step bisect/merge -> repeat.
AdaptiveHistory adapt_loop_unsteady(const SlabDiscretization& initial,
                                    const PrimalProblem& problem,
                                    const OutputFunctional& output,
                                    const UnsteadyAdaptOptions& options);

/// History CSV: iter,dof,J,dJ_est,J_corrected,true_error_or_NA
std::string write_history_csv(const AdaptiveHistory& history);

} // namespace dwrlab

#pragma once

#include "dwrlab/config.hpp"

namespace dwrlab {

struct StudyRow {
    int n_elem = 0;
    double h = 0.0;
    long dofs = 0;
    double output = 0.0;
    double true_error = 0.0;      // J_H - J_exact
    double fine_truth = 0.0;      // J_h - J_H from an actual fine solve
    std::vector<double> estimates; // one per enabled form
    double corrected = 0.0;        // J_H + primal-form estimate
    double effectivity = 0.0;      // primal estimate / fine truth
    double remainder2 = 0.0;       // fine_truth - primal estimate
    double remainder3 = 0.0;       // fine_truth - third-order estimate
};

struct StudyResult {
    std::vector<EstimateForm> forms;
    std::vector<StudyRow> rows;
    /// least-squares slopes of log|column| against log h
    double slope_true_error = 0.0;
    double slope_corrected_error = 0.0; // |corrected - J_exact|
    double slope_remainder2 = 0.0;
    double slope_remainder3 = 0.0;
};

/// Convergence study over the configured mesh sequence; requires analytic
/// catalog truth for the problem/output pair.
StudyResult run_study(const Config& config);

std::string write_study_csv(const StudyResult& result);

/// Least-squares slope of log(|y|) against log(x), skipping entries below
/// the noise floor.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                 double noise_floor = 1e-14);

} // namespace dwrlab

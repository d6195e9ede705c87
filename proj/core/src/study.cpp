#include "dwrlab/study.hpp"

#include <cmath>
#include <sstream>

#include "dwrlab/io.hpp"

namespace dwrlab {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                 double noise_floor) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(y[i]) > noise_floor) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(std::abs(y[i])));
        }
    }
    const std::size_t n = lx.size();
    if (n < 2) return 0.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StudyResult run_study(const Config& config) {
    if (config.study_meshes.empty())
        throw ValidationError("meshes", "study requires a mesh sequence");
    const double j_exact = analytic_output(config.problem, config.output);

    StudyResult result;
    result.forms = config.study_forms;
    const bool unsteady = is_unsteady(config.problem.kind);

    for (int n : config.study_meshes) {
        StudyRow row;
        row.n_elem = n;
        row.h = (config.problem.x_right - config.problem.x_left) / n;
        const DiscreteSpace space(
            uniform_mesh(config.problem.x_left, config.problem.x_right, n, config.order),
            config.problem.kind);
        row.dofs = space.n_dofs();

        if (!unsteady) {
            const Vector u = solve_primal(space, config.problem);
            row.output = evaluate_output(space, config.problem, config.output, u);
            FinePairOptions opts;
            opts.fine_mode = config.fine_mode;
            opts.adjoint_mode = config.adjoint_mode;
            opts.smoothing_sweeps = config.smoothing_sweeps;
            const FinePair pair =
                build_fine_pair(space, config.problem, config.output, u, opts);
            row.fine_truth = fine_truth(pair, config.problem, config.output);
            const Vector u_fine = fine_primal_solve(pair, config.problem);

            double primal_value = 0.0, third_value = 0.0;
            bool have_third = false;
            for (EstimateForm form : config.study_forms) {
                ErrorReport rep;
                switch (form) {
                    case EstimateForm::Primal:
                        rep = primal_estimate(pair, config.problem);
                        primal_value = rep.estimate;
                        break;
                    case EstimateForm::FeOrthogonalized:
                        rep = fe_orthogonalized_estimate(pair, config.problem);
                        break;
                    case EstimateForm::Dual:
                        rep = dual_estimate(pair, config.problem, config.output, u_fine);
                        break;
                    case EstimateForm::ThirdOrder:
                        rep = third_order_estimate(pair, config.problem, config.output, u_fine);
                        third_value = rep.estimate;
                        have_third = true;
                        break;
                }
                row.estimates.push_back(rep.estimate);
            }
            if (config.study_forms.empty() ||
                config.study_forms.front() != EstimateForm::Primal)
                primal_value = primal_estimate(pair, config.problem).estimate;
            row.corrected = row.output + primal_value;
            row.remainder2 = row.fine_truth - primal_value;
            row.remainder3 = have_third
                                 ? row.fine_truth - third_value
                                 : row.fine_truth -
                                       third_order_estimate(pair, config.problem,
                                                            config.output, u_fine)
                                           .estimate;
            row.effectivity = std::abs(row.fine_truth) > 1e-14
                                  ? primal_value / row.fine_truth
                                  : 1.0;
        } else {
            PrimalProblem problem = config.problem;
            const SpaceTimeSolution traj = time_march(space, problem);
            row.output = evaluate_unsteady_output(space, problem, config.output, traj);
            UnsteadyEstimateOptions opts;
            opts.fine_mode = config.fine_mode;
            opts.with_anisotropy = false;
            const UnsteadyFineResult fine =
                unsteady_estimate(space, problem, config.output, traj, opts);
            row.fine_truth =
                unsteady_fine_truth(space, problem, config.output, traj, config.fine_mode);
            row.estimates.assign(config.study_forms.size(), fine.report.estimate);
            row.corrected = row.output + fine.report.estimate;
            row.remainder2 = row.fine_truth - fine.report.estimate;
            row.remainder3 = row.remainder2;
            row.effectivity = std::abs(row.fine_truth) > 1e-14
                                  ? fine.report.estimate / row.fine_truth
                                  : 1.0;
        }
        row.true_error = row.output - j_exact;
        result.rows.push_back(row);
    }

    std::vector<double> hs, te, ce, r2, r3;
    for (const StudyRow& row : result.rows) {
        hs.push_back(row.h);
        te.push_back(row.true_error);
        ce.push_back(row.corrected - j_exact);
        r2.push_back(row.remainder2);
        r3.push_back(row.remainder3);
    }
    result.slope_true_error = fit_slope(hs, te);
    result.slope_corrected_error = fit_slope(hs, ce);
    result.slope_remainder2 = fit_slope(hs, r2);
    result.slope_remainder3 = fit_slope(hs, r3);
    return result;
}

std::string write_study_csv(const StudyResult& result) {
    std::ostringstream os;
    os << "n_elem,h,dof,J,true_error";
    for (EstimateForm f : result.forms) os << ",est_" << to_string(f);
    os << ",corrected,effectivity,remainder2,remainder3\n";
    const int extra = static_cast<int>(result.forms.size());
    for (const StudyRow& row : result.rows) {
        os << row.n_elem << "," << format_real(row.h) << "," << row.dofs << ","
           << format_real(row.output) << "," << format_real(row.true_error);
        for (double e : row.estimates) os << "," << format_real(e);
        os << "," << format_real(row.corrected) << "," << format_real(row.effectivity) << ","
           << format_real(row.remainder2) << "," << format_real(row.remainder3) << "\n";
    }
    auto footer = [&](const std::string& name, double slope) {
        os << "slope:" << name << "," << format_real(slope);
        for (int i = 0; i < 7 + extra; ++i) os << ",NA";
        os << "\n";
    };
    footer("true_error", result.slope_true_error);
    footer("corrected_error", result.slope_corrected_error);
    footer("remainder2", result.slope_remainder2);
    footer("remainder3", result.slope_remainder3);
    return os.str();
}

} // namespace dwrlab

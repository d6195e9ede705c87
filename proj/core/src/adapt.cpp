#include "dwrlab/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dwrlab/basis.hpp"
#include "dwrlab/io.hpp"

namespace dwrlab {

std::vector<double> figure_of_merit(const std::vector<double>& indicators,
                                    const std::vector<double>& dof_costs) {
    if (indicators.size() != dof_costs.size())
        throw DimensionMismatch("figure_of_merit: size mismatch");
    std::vector<double> scores(indicators.size());
    for (std::size_t i = 0; i < indicators.size(); ++i) {
        if (!(dof_costs[i] > 0.0))
            throw Error("figure_of_merit: refinement cost must be positive");
        scores[i] = indicators[i] / dof_costs[i];
    }
    return scores;
}

std::vector<Mark> mark_fixed_fraction(const std::vector<double>& scores, double refine_frac,
                                      double coarsen_frac) {
    if (refine_frac < 0.0 || coarsen_frac < 0.0 || refine_frac + coarsen_frac > 1.0)
        throw InvalidFraction("mark_fixed_fraction: fractions must be >= 0 and sum to <= 1");
    const int n = static_cast<int>(scores.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    });
    std::vector<Mark> marks(n, Mark::Keep);
    const int n_refine = static_cast<int>(std::ceil(refine_frac * n));
    const int n_coarsen = static_cast<int>(std::floor(coarsen_frac * n));
    for (int i = 0; i < n_refine; ++i) marks[order[i]] = Mark::Refine;
    // coarsen from the low end of the ranking; ties there resolve to the
    // lower element index as well
    std::vector<int> tail(order.rbegin(), order.rend());
    std::stable_sort(tail.begin(), tail.end(), [&](int a, int b) {
        return scores[a] != scores[b] ? scores[a] < scores[b] : a < b;
    });
    int placed = 0;
    for (int idx : tail) {
        if (placed >= n_coarsen) break;
        if (marks[idx] == Mark::Keep) {
            marks[idx] = Mark::Coarsen;
            ++placed;
        }
    }
    return marks;
}

void validate_plan(const AdaptationPlan& plan, double refine_frac, double coarsen_frac) {
    auto count = [](const std::vector<Mark>& marks, Mark kind) {
        long c = 0;
        for (Mark m : marks)
            if (m == kind) ++c;
        return c;
    };
    const long n =
        static_cast<long>(plan.spatial.size()) + static_cast<long>(plan.temporal.size());
    if (n == 0) return;
    const long refined = count(plan.spatial, Mark::Refine) + count(plan.temporal, Mark::Refine);
    const long coarsened =
        count(plan.spatial, Mark::Coarsen) + count(plan.temporal, Mark::Coarsen);
    if (refined > std::ceil(refine_frac * n) || coarsened > std::floor(coarsen_frac * n))
        throw InvalidFraction("adaptation plan exceeds the configured mark fractions");
    // temporal merges must come in adjacent pairs
    for (std::size_t m = 0; m < plan.temporal.size();) {
        if (plan.temporal[m] != Mark::Coarsen) {
            ++m;
            continue;
        }
        if (m + 1 >= plan.temporal.size() || plan.temporal[m + 1] != Mark::Coarsen)
            throw InvalidFraction("temporal merge marks must cover step pairs");
        m += 2;
    }
}

namespace {

Mesh1D apply_spatial_marks_h(const Mesh1D& mesh, const std::vector<Mark>& marks) {
    std::vector<bool> refine(mesh.n_elements(), false);
    for (int e = 0; e < mesh.n_elements(); ++e) refine[e] = marks[e] == Mark::Refine;
    Mesh1D refined = refine_h(mesh, refine);
    // remap coarsen marks through the refinement (children are never marked)
    std::vector<bool> coarsen(refined.n_elements(), false);
    int shift = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (marks[e] == Mark::Coarsen) coarsen[e + shift] = true;
        if (refine[e]) ++shift;
    }
    return coarsen_h(refined, coarsen);
}

Mesh1D apply_spatial_marks_p(const Mesh1D& mesh, const std::vector<Mark>& marks) {
    std::vector<int> inc(mesh.n_elements(), 0);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (marks[e] == Mark::Refine && mesh.order(e) < kMaxOrder) inc[e] = 1;
        if (marks[e] == Mark::Coarsen && mesh.order(e) > 0) inc[e] = -1;
    }
    return enrich_p(mesh, inc);
}

std::vector<double> residual_indicators(const FinePair& pair, const PrimalProblem& problem) {
    const Vector r = assemble_residual(pair.fine, problem, pair.u_injected);
    std::vector<double> ind(pair.coarse.n_elements(), 0.0);
    for (int ef = 0; ef < pair.fine.n_elements(); ++ef) {
        double s = 0.0;
        for (int j = 0; j < pair.fine.n_local(ef); ++j)
            s += std::abs(r[pair.fine.dof_start(ef) + j]);
        ind[pair.injection.fine_to_coarse[ef]] += s;
    }
    return ind;
}

} // namespace

AdaptiveHistory adapt_loop_steady(const DiscreteSpace& initial_space,
                                  const PrimalProblem& problem, const OutputFunctional& output,
                                  const SteadyAdaptOptions& options) {
    AdaptiveHistory history;
    DiscreteSpace space = initial_space;
    for (int iteration = 0; iteration <= options.max_iterations; ++iteration) {
        const Vector u = solve_primal(space, problem);
        const double j = evaluate_output(space, problem, output, u);
        const FinePair pair = build_fine_pair(space, problem, output, u, options.fine);
        const ErrorReport report = primal_estimate(pair, problem);

        AdaptiveRecord record;
        record.iteration = iteration;
        record.dofs = space.n_dofs();
        record.output = j;
        record.estimate = report.estimate;
        record.corrected = j + report.estimate;
        if (options.true_output) record.true_error = j - *options.true_output;
        history.records.push_back(record);
        history.meshes.push_back(space.mesh());

        if (std::abs(report.estimate) <= options.tolerance) {
            history.converged = true;
            return history;
        }
        if (options.stop_true_error && record.true_error &&
            std::abs(*record.true_error) <= *options.stop_true_error) {
            history.converged = true;
            return history;
        }
        if (space.n_dofs() >= options.dof_cap) return history;
        if (iteration == options.max_iterations) break;

        const std::vector<double> indicators = options.residual_indicator
                                                   ? residual_indicators(pair, problem)
                                                   : report.indicator;
        std::vector<double> costs(space.n_elements());
        for (int e = 0; e < space.n_elements(); ++e)
            costs[e] = options.mode == AdaptMode::H ? space.order(e) + 1.0 : 1.0;
        const std::vector<double> scores = figure_of_merit(indicators, costs);
        AdaptationPlan plan;
        plan.mode = options.mode;
        plan.scores = scores;
        plan.spatial =
            mark_fixed_fraction(scores, options.refine_fraction, options.coarsen_fraction);
        validate_plan(plan, options.refine_fraction, options.coarsen_fraction);

        std::vector<int> refined(1, 0);
        for (const Mark m : plan.spatial)
            if (m == Mark::Refine) ++refined[0];
        history.refined_per_step.push_back(refined);

        const Mesh1D next = options.mode == AdaptMode::H
                                ? apply_spatial_marks_h(space.mesh(), plan.spatial)
                                : apply_spatial_marks_p(space.mesh(), plan.spatial);
        space = DiscreteSpace(next, space.kind());
    }
    if (options.error_on_max_iterations)
        throw MaxIterations("adapt_loop_steady: tolerance not reached within iteration limit");
    return history;
}

long SlabDiscretization::total_dofs() const {
    long total = 0;
    for (const DiscreteSpace& s : spaces) total += s.n_dofs();
    return total;
}

double SlabDiscretization::time_at(int m) const {
    double t = 0.0;
    for (int i = 0; i < m; ++i) t += dts[i];
    return t;
}

namespace {

bool same_space(const DiscreteSpace& a, const DiscreteSpace& b) {
    if (a.n_elements() != b.n_elements() || a.n_dofs() != b.n_dofs()) return false;
    for (int e = 0; e < a.n_elements(); ++e)
        if (a.order(e) != b.order(e) ||
            a.mesh().element_left(e) != b.mesh().element_left(e) ||
            a.mesh().element_right(e) != b.mesh().element_right(e))
            return false;
    return true;
}

} // namespace

L2Transfer::L2Transfer(const DiscreteSpace& from, const DiscreteSpace& to) {
    if (same_space(from, to)) {
        identity_ = true;
        return;
    }
    // merged breakpoints of both meshes
    std::vector<double> cuts;
    cuts.reserve(from.mesh().boundaries().size() + to.mesh().boundaries().size());
    cuts.insert(cuts.end(), from.mesh().boundaries().begin(), from.mesh().boundaries().end());
    cuts.insert(cuts.end(), to.mesh().boundaries().begin(), to.mesh().boundaries().end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-13; }),
               cuts.end());

    std::vector<Triplet> trip;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double xl = cuts[c], xr = cuts[c + 1];
        const double mid = 0.5 * (xl + xr);
        const int ef = from.mesh().find_element(mid);
        const int et = to.mesh().find_element(mid);
        const int pf = from.order(ef), pt = to.order(et);
        const QuadratureRule rule = gauss_legendre((pf + pt) / 2 + 2);
        const auto nodes_f = from.tables(ef).nodes;
        const auto nodes_t = to.tables(et).nodes;
        for (int q = 0; q < rule.size(); ++q) {
            const double x = xl + 0.5 * (xr - xl) * (rule.points[q] + 1.0);
            const double w = 0.5 * (xr - xl) * rule.weights[q];
            const double xi_f =
                2.0 * (x - from.mesh().element_left(ef)) / from.mesh().element_size(ef) - 1.0;
            const double xi_t =
                2.0 * (x - to.mesh().element_left(et)) / to.mesh().element_size(et) - 1.0;
            for (int i = 0; i <= pt; ++i) {
                const double phi_t = lagrange_value(nodes_t, i, xi_t);
                for (int j = 0; j <= pf; ++j) {
                    const double phi_f = lagrange_value(nodes_f, j, xi_f);
                    trip.push_back({to.dof_start(et) + i, from.dof_start(ef) + j,
                                    w * phi_t * phi_f});
                }
            }
        }
    }
    mixed_ = SparseMatrix(to.n_dofs(), from.n_dofs(), std::move(trip));
    mass_to_ = std::make_shared<LuFactorization>(mass_matrix(to));
}

Vector L2Transfer::apply(const Vector& v) const {
    if (identity_) return v;
    return mass_to_->solve(mixed_.matvec(v));
}

Vector L2Transfer::apply_transpose(const Vector& w) const {
    if (identity_) return w;
    // T = M^{-1} B with symmetric M, so T^T w = B^T M^{-1} w
    return mixed_.matvec_transpose(mass_to_->solve(w));
}

SlabSolution march_slabs(const SlabDiscretization& slabs, const PrimalProblem& problem) {
    SlabSolution sol;
    const int n_steps = slabs.n_steps();
    sol.initial = slabs.spaces[0].project(problem.initial_condition);
    sol.states.resize(n_steps);
    Vector prev = sol.initial;
    double t = 0.0;
    for (int m = 1; m <= n_steps; ++m) {
        const DiscreteSpace& space = slabs.spaces[m - 1];
        const double dt = slabs.dts[m - 1];
        t += dt;
        if (m > 1 && !same_space(slabs.spaces[m - 2], space))
            prev = L2Transfer(slabs.spaces[m - 2], space).apply(prev);
        const SparseMatrix mass = mass_matrix(space);
        const Vector zero(space.n_dofs(), 0.0);
        const SparseMatrix stiffness = assemble_jacobian(space, problem, zero);
        std::vector<Triplet> trip;
        for (int r = 0; r < mass.rows(); ++r) {
            for (int k = mass.row_offsets()[r]; k < mass.row_offsets()[r + 1]; ++k)
                trip.push_back({r, mass.col_indices()[k], mass.values()[k] / dt});
            for (int k = stiffness.row_offsets()[r]; k < stiffness.row_offsets()[r + 1]; ++k)
                trip.push_back({r, stiffness.col_indices()[k], stiffness.values()[k]});
        }
        const SparseMatrix system(mass.rows(), mass.cols(), std::move(trip));
        Vector b = load_vector(space, problem, t);
        const Vector mp = mass.matvec(prev);
        axpy(1.0 / dt, mp, b);
        Vector u = solve(system, b);
        prev = u;
        sol.states[m - 1] = std::move(u);
    }
    return sol;
}

namespace {

double slab_step_weight(const OutputFunctional& output, const SlabDiscretization& slabs,
                        int m) {
    const double t_end = slabs.time_at(m);
    const double t_start = t_end - slabs.dts[m - 1];
    if (output.time_begin == output.time_end)
        return std::abs(t_end - output.time_end) <= 1e-9 ? 1.0 : 0.0;
    const double tol = 1e-9;
    return (t_start >= output.time_begin - tol && t_end <= output.time_end + tol)
               ? slabs.dts[m - 1]
               : 0.0;
}

double slab_output(const SlabDiscretization& slabs, const PrimalProblem& problem,
                   const OutputFunctional& output, const SlabSolution& sol) {
    double j = 0.0;
    for (int m = 1; m <= slabs.n_steps(); ++m) {
        const double w = slab_step_weight(output, slabs, m);
        if (w != 0.0)
            j += w * evaluate_output(slabs.spaces[m - 1], problem, output, sol.states[m - 1],
                                     slabs.time_at(m));
    }
    return j;
}

std::vector<Vector> adjoint_slabs(const SlabDiscretization& slabs,
                                  const PrimalProblem& problem,
                                  const OutputFunctional& output, const SlabSolution& sol) {
    const int n_steps = slabs.n_steps();
    std::vector<Vector> psi(n_steps);
    Vector carry; // T_{m+1}^T M_{m+1}^T Psi^{m+1} / dt_{m+1}, already on space m
    for (int m = n_steps; m >= 1; --m) {
        const DiscreteSpace& space = slabs.spaces[m - 1];
        const double dt = slabs.dts[m - 1];
        const SparseMatrix mass = mass_matrix(space);
        const Vector zero(space.n_dofs(), 0.0);
        const SparseMatrix stiffness = assemble_jacobian(space, problem, zero);
        std::vector<Triplet> trip;
        for (int r = 0; r < mass.rows(); ++r) {
            for (int k = mass.row_offsets()[r]; k < mass.row_offsets()[r + 1]; ++k)
                trip.push_back({r, mass.col_indices()[k], mass.values()[k] / dt});
            for (int k = stiffness.row_offsets()[r]; k < stiffness.row_offsets()[r + 1]; ++k)
                trip.push_back({r, stiffness.col_indices()[k], stiffness.values()[k]});
        }
        const SparseMatrix system(mass.rows(), mass.cols(), std::move(trip));
        Vector b(space.n_dofs(), 0.0);
        const double w = slab_step_weight(output, slabs, m);
        if (w != 0.0) {
            b = output_linearization(space, problem, output, sol.states[m - 1],
                                     slabs.time_at(m));
            for (double& v : b) v *= w;
        }
        if (!carry.empty()) axpy(1.0, carry, b);
        Vector p = solve_transpose(system, b);
        if (m > 1) {
            const Vector mp = p; // (M^T p)/dt on this space, then transfer back
            Vector mt = mass.matvec_transpose(mp);
            for (double& v : mt) v /= dt;
            if (!same_space(slabs.spaces[m - 2], space))
                carry = L2Transfer(slabs.spaces[m - 2], space).apply_transpose(mt);
            else
                carry = std::move(mt);
        }
        psi[m - 1] = std::move(p);
    }
    return psi;
}

struct SlabEstimate {
    std::vector<std::vector<double>> signed_contribution; // [m][e] coarse grid
    std::vector<std::vector<double>> beta_space;          // [m][e]
    double estimate = 0.0;
};

SlabDiscretization make_fine_slabs(const SlabDiscretization& coarse, bool enrich,
                                   int time_factor) {
    SlabDiscretization fine;
    for (int m = 0; m < coarse.n_steps(); ++m) {
        DiscreteSpace fs = enrich ? enrich_space(coarse.spaces[m]) : coarse.spaces[m];
        for (int r = 0; r < time_factor; ++r) {
            fine.spaces.push_back(fs);
            fine.dts.push_back(coarse.dts[m] / time_factor);
        }
    }
    return fine;
}

/// Contributions of the (possibly semi-)refined surrogate, localized to the
/// coarse per-slab elements.
std::vector<std::vector<double>> slab_contributions(
    const SlabDiscretization& coarse, const SlabSolution& sol, const PrimalProblem& problem,
    const OutputFunctional& output, bool enrich, int time_factor, bool difference_weights,
    const std::vector<Vector>* coarse_adjoint) {
    const SlabDiscretization fine = make_fine_slabs(coarse, enrich, time_factor);
    const int n_fine = fine.n_steps();

    // injected trajectory
    std::vector<InjectionOperator> injections(coarse.n_steps());
    for (int m = 0; m < coarse.n_steps(); ++m)
        injections[m] = space_injection(coarse.spaces[m], fine.spaces[m * time_factor]);
    SlabSolution injected;
    injected.initial = fine.spaces[0].project(problem.initial_condition);
    injected.states.resize(n_fine);
    for (int k = 1; k <= n_fine; ++k) {
        const int m = (k + time_factor - 1) / time_factor;
        injected.states[k - 1] = injections[m - 1].apply(sol.states[m - 1]);
    }

    const std::vector<Vector> psi = adjoint_slabs(fine, problem, output, injected);

    std::vector<std::vector<double>> contrib(coarse.n_steps());
    for (int m = 0; m < coarse.n_steps(); ++m)
        contrib[m].assign(coarse.spaces[m].n_elements(), 0.0);

    double t = 0.0;
    for (int k = 1; k <= n_fine; ++k) {
        const int m = (k + time_factor - 1) / time_factor;
        const DiscreteSpace& space = fine.spaces[k - 1];
        const double dt = fine.dts[k - 1];
        t += dt;
        const Vector& uk = injected.states[k - 1];
        Vector prev = k == 1 ? injected.initial : injected.states[k - 2];
        if (k > 1 && !same_space(fine.spaces[k - 2], space))
            prev = L2Transfer(fine.spaces[k - 2], space).apply(prev);

        const SparseMatrix mass = mass_matrix(space);
        const Vector zero(space.n_dofs(), 0.0);
        const SparseMatrix stiffness = assemble_jacobian(space, problem, zero);
        Vector r = stiffness.matvec(uk);
        const Vector f = load_vector(space, problem, t);
        axpy(-1.0, f, r);
        Vector diff = uk;
        axpy(-1.0, prev, diff);
        const Vector md = mass.matvec(diff);
        axpy(1.0 / dt, md, r);

        Vector w = psi[k - 1];
        if (difference_weights && coarse_adjoint) {
            Vector inj = injections[m - 1].apply((*coarse_adjoint)[m - 1]);
            axpy(-1.0 / time_factor, inj, w);
        }
        for (int ef = 0; ef < space.n_elements(); ++ef) {
            double s = 0.0;
            for (int j = 0; j < space.n_local(ef); ++j)
                s += w[space.dof_start(ef) + j] * r[space.dof_start(ef) + j];
            contrib[m - 1][injections[m - 1].fine_to_coarse[ef]] += -s;
        }
    }
    return contrib;
}

SlabEstimate estimate_slabs(const SlabDiscretization& slabs, const SlabSolution& sol,
                            const PrimalProblem& problem, const OutputFunctional& output) {
    SlabEstimate est;
    est.signed_contribution =
        slab_contributions(slabs, sol, problem, output, true, 2, false, nullptr);
    for (const auto& row : est.signed_contribution)
        for (double v : row) est.estimate += v;

    const std::vector<Vector> coarse_psi = adjoint_slabs(slabs, problem, output, sol);
    const auto eps_space =
        slab_contributions(slabs, sol, problem, output, true, 1, true, &coarse_psi);
    const auto eps_time =
        slab_contributions(slabs, sol, problem, output, false, 2, true, &coarse_psi);
    est.beta_space.resize(slabs.n_steps());
    for (int m = 0; m < slabs.n_steps(); ++m) {
        est.beta_space[m].resize(est.signed_contribution[m].size());
        for (std::size_t e = 0; e < est.beta_space[m].size(); ++e) {
            const double es = std::abs(eps_space[m][e]);
            const double et = std::abs(eps_time[m][e]);
            est.beta_space[m][e] = (es + et == 0.0) ? 0.5 : es / (es + et);
        }
    }
    return est;
}

} // namespace

AdaptiveHistory adapt_loop_unsteady(const SlabDiscretization& initial,
                                    const PrimalProblem& problem,
                                    const OutputFunctional& output,
                                    const UnsteadyAdaptOptions& options) {
    AdaptiveHistory history;
    SlabDiscretization slabs = initial;
    auto snapshot = [&history](const SlabDiscretization& s) {
        history.meshes.clear();
        for (const DiscreteSpace& space : s.spaces) history.meshes.push_back(space.mesh());
    };
    for (int iteration = 0; iteration <= options.max_iterations; ++iteration) {
        snapshot(slabs); // history.meshes holds the final iteration's slab meshes
        const SlabSolution sol = march_slabs(slabs, problem);
        const double j = slab_output(slabs, problem, output, sol);
        const SlabEstimate est = estimate_slabs(slabs, sol, problem, output);

        AdaptiveRecord record;
        record.iteration = iteration;
        record.dofs = slabs.total_dofs();
        record.output = j;
        record.estimate = est.estimate;
        record.corrected = j + est.estimate;
        if (options.true_output) record.true_error = j - *options.true_output;
        history.records.push_back(record);

        if (std::abs(est.estimate) <= options.tolerance) {
            history.converged = true;
            return history;
        }
        if (slabs.total_dofs() >= options.dof_cap) return history;
        if (iteration == options.max_iterations) break;

        // figure-of-merit pool: spatial (element, step) entities then steps
        std::vector<double> scores;
        std::vector<std::pair<int, int>> spatial_entity; // (m, e)
        for (int m = 0; m < slabs.n_steps(); ++m) {
            const DiscreteSpace& space = slabs.spaces[m];
            for (int e = 0; e < space.n_elements(); ++e) {
                const double eps = std::abs(est.signed_contribution[m][e]);
                const double beta = est.beta_space[m][e];
                const double cost = options.spatial_mode == AdaptMode::H
                                        ? space.order(e) + 1.0
                                        : 1.0;
                scores.push_back(beta * eps / cost);
                spatial_entity.emplace_back(m, e);
            }
        }
        const std::size_t n_spatial = scores.size();
        for (int m = 0; m < slabs.n_steps(); ++m) {
            double temporal = 0.0;
            for (std::size_t e = 0; e < est.signed_contribution[m].size(); ++e)
                temporal += (1.0 - est.beta_space[m][e]) *
                            std::abs(est.signed_contribution[m][e]);
            scores.push_back(temporal / slabs.spaces[m].n_dofs());
        }
        const std::vector<Mark> marks =
            mark_fixed_fraction(scores, options.refine_fraction, options.coarsen_fraction);
        AdaptationPlan plan;
        plan.mode = options.spatial_mode;
        plan.scores = scores;
        plan.spatial.assign(marks.begin(), marks.begin() + n_spatial);
        plan.temporal.assign(marks.begin() + n_spatial, marks.end());

        // apply spatial marks per slab
        std::vector<std::vector<Mark>> spatial_marks(slabs.n_steps());
        for (int m = 0; m < slabs.n_steps(); ++m)
            spatial_marks[m].assign(slabs.spaces[m].n_elements(), Mark::Keep);
        std::vector<int> refined(slabs.n_steps(), 0);
        for (std::size_t i = 0; i < n_spatial; ++i) {
            const auto [m, e] = spatial_entity[i];
            spatial_marks[m][e] = plan.spatial[i];
            if (plan.spatial[i] == Mark::Refine) ++refined[m];
        }

        SlabDiscretization next;
        for (int m = 0; m < slabs.n_steps(); ++m) {
            const Mesh1D mesh = options.spatial_mode == AdaptMode::H
                                    ? apply_spatial_marks_h(slabs.spaces[m].mesh(),
                                                            spatial_marks[m])
                                    : apply_spatial_marks_p(slabs.spaces[m].mesh(),
                                                            spatial_marks[m]);
            next.spaces.emplace_back(mesh, problem.kind);
            next.dts.push_back(slabs.dts[m]);
        }

        // merge marks take effect only on adjacent pairs with equal meshes
        for (std::size_t m = 0; m < plan.temporal.size();) {
            if (plan.temporal[m] != Mark::Coarsen) {
                ++m;
                continue;
            }
            if (m + 1 < plan.temporal.size() && plan.temporal[m + 1] == Mark::Coarsen &&
                same_space(next.spaces[m], next.spaces[m + 1])) {
                m += 2;
            } else {
                plan.temporal[m] = Mark::Keep;
                ++m;
            }
        }
        validate_plan(plan, options.refine_fraction, options.coarsen_fraction);

        // temporal marks: bisect marked steps, merge marked pairs
        SlabDiscretization rebuilt;
        int m = 0;
        while (m < next.n_steps()) {
            const Mark tm = plan.temporal[m];
            if (tm == Mark::Refine) {
                ++refined[m];
                rebuilt.spaces.push_back(next.spaces[m]);
                rebuilt.spaces.push_back(next.spaces[m]);
                rebuilt.dts.push_back(next.dts[m] / 2.0);
                rebuilt.dts.push_back(next.dts[m] / 2.0);
                ++m;
            } else if (tm == Mark::Coarsen) {
                rebuilt.spaces.push_back(next.spaces[m]);
                rebuilt.dts.push_back(next.dts[m] + next.dts[m + 1]);
                m += 2;
            } else {
                rebuilt.spaces.push_back(next.spaces[m]);
                rebuilt.dts.push_back(next.dts[m]);
                ++m;
            }
        }
        history.refined_per_step.push_back(refined);
        slabs = std::move(rebuilt);
    }
    if (options.error_on_max_iterations)
        throw MaxIterations("adapt_loop_unsteady: tolerance not reached within iteration limit");
    return history;
}

std::string write_history_csv(const AdaptiveHistory& history) {
    std::ostringstream os;
    os << "iter,dof,J,dJ_est,J_corrected,true_error_or_NA\n";
    for (const AdaptiveRecord& r : history.records) {
        os << r.iteration << "," << r.dofs << "," << format_real(r.output) << ","
           << format_real(r.estimate) << "," << format_real(r.corrected) << ",";
        if (r.true_error)
            os << format_real(*r.true_error);
        else
            os << "NA";
        os << "\n";
    }
    return os.str();
}

} // namespace dwrlab

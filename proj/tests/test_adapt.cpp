#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dwrlab/adapt.hpp"

using namespace dwrlab;

namespace {
OutputFunctional interior_one() {
    OutputFunctional out;
    out.interior_weight = [](double, double) { return 1.0; };
    return out;
}
} // namespace

TEST_CASE("figure_of_merit: hand cases") {
    const std::vector<double> scores = figure_of_merit({4.0, 1.0}, {2.0, 1.0});
    CHECK(scores[0] == 2.0);
    CHECK(scores[1] == 1.0);
    CHECK(figure_of_merit({0.0}, {3.0})[0] == 0.0);
    // equal indicators, unequal costs: ranking follows inverse cost
    const std::vector<double> equal = figure_of_merit({1.0, 1.0, 1.0}, {4.0, 2.0, 1.0});
    CHECK(equal[2] > equal[1]);
    CHECK(equal[1] > equal[0]);
    CHECK_THROWS_AS(figure_of_merit({1.0}, {0.0}), Error);
    CHECK_THROWS_AS(figure_of_merit({1.0, 2.0}, {1.0}), DimensionMismatch);
}

TEST_CASE("mark_fixed_fraction: hand case") {
    const std::vector<Mark> marks = mark_fixed_fraction({3.0, 1.0, 2.0, 0.0}, 0.25, 0.25);
    CHECK(marks[0] == Mark::Refine);
    CHECK(marks[1] == Mark::Keep);
    CHECK(marks[2] == Mark::Keep);
    CHECK(marks[3] == Mark::Coarsen);
}

TEST_CASE("mark_fixed_fraction: zero fraction and tie-breaks") {
    const std::vector<Mark> none = mark_fixed_fraction({3.0, 1.0}, 0.0, 0.0);
    CHECK(none[0] == Mark::Keep);
    CHECK(none[1] == Mark::Keep);

    // all-equal scores: the lower index wins the refine slot, the lowest
    // non-refined index the coarsen slot
    const std::vector<Mark> tied = mark_fixed_fraction({1.0, 1.0, 1.0, 1.0}, 0.25, 0.25);
    CHECK(tied[0] == Mark::Refine);
    CHECK(tied[1] == Mark::Coarsen);
    CHECK(tied[2] == Mark::Keep);
    CHECK(tied[3] == Mark::Keep);

    CHECK_THROWS_AS(mark_fixed_fraction({1.0}, 0.7, 0.7), InvalidFraction);
    CHECK_THROWS_AS(mark_fixed_fraction({1.0}, -0.1, 0.0), InvalidFraction);
}

TEST_CASE("adapt_loop_steady: already-exact case terminates immediately") {
    const PrimalProblem problem = catalog_case("advection_unit").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 1), problem.kind);
    SteadyAdaptOptions opts;
    opts.tolerance = 1e-8;
    const AdaptiveHistory history =
        adapt_loop_steady(space, problem, interior_one(), opts);
    CHECK(history.converged);
    CHECK(history.records.size() == 1);
    CHECK(history.records[0].iteration == 0);
}

TEST_CASE("adapt_loop_steady: refinement concentrates upstream of the point output") {
    const CatalogCase& cat = catalog_case("advection_bump");
    OutputFunctional out;
    // inside the steep source region: the output error is local to the
    // underresolved elements upstream of (and containing) the point
    out.point_location = 0.27;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 1), cat.problem.kind);
    SteadyAdaptOptions opts;
    opts.tolerance = 1e-8;
    opts.max_iterations = 8;
    opts.error_on_max_iterations = false;
    opts.true_output = analytic_output(cat.problem, out);
    const AdaptiveHistory history = adapt_loop_steady(space, cat.problem, out, opts);
    REQUIRE(history.meshes.size() >= 2);
    // count refined elements by comparing successive meshes
    int upstream = 0, total = 0;
    for (std::size_t i = 1; i < history.meshes.size(); ++i) {
        const Mesh1D& prev = history.meshes[i - 1];
        const Mesh1D& next = history.meshes[i];
        // an element was refined if its midpoint became a boundary
        for (int e = 0; e < prev.n_elements(); ++e) {
            const double mid = 0.5 * (prev.element_left(e) + prev.element_right(e));
            bool found = false;
            for (double b : next.boundaries())
                if (std::abs(b - mid) <= 1e-13) found = true;
            if (found) {
                ++total;
                if (mid < 0.27) ++upstream;
            }
        }
    }
    REQUIRE(total > 0);
    CHECK(static_cast<double>(upstream) / total >= 0.8);
}

TEST_CASE("adapt_loop_steady: estimates trend downward") {
    const PrimalProblem problem = catalog_case("advection_sine").problem;
    OutputFunctional out;
    out.point_location = 0.53;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 1), problem.kind);
    SteadyAdaptOptions opts;
    opts.tolerance = 1e-12;
    opts.max_iterations = 6;
    opts.error_on_max_iterations = false;
    const AdaptiveHistory history = adapt_loop_steady(space, problem, out, opts);
    REQUIRE(history.records.size() >= 4);
    for (std::size_t i = 0; i + 2 < history.records.size(); ++i)
        CHECK(std::abs(history.records[i + 2].estimate) <
              std::abs(history.records[i].estimate));
}

TEST_CASE("adapt_loop_steady: MaxIterations is an error by default") {
    const PrimalProblem problem = catalog_case("advection_sine").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 4, 1), problem.kind);
    SteadyAdaptOptions opts;
    opts.tolerance = 1e-30;
    opts.max_iterations = 2;
    CHECK_THROWS_AS(adapt_loop_steady(space, problem, interior_one(), opts), MaxIterations);
}

TEST_CASE("adapt_loop_steady: deterministic histories") {
    const PrimalProblem problem = catalog_case("advection_sine").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 1), problem.kind);
    SteadyAdaptOptions opts;
    opts.tolerance = 1e-12;
    opts.max_iterations = 4;
    opts.error_on_max_iterations = false;
    const AdaptiveHistory a = adapt_loop_steady(space, problem, interior_one(), opts);
    const AdaptiveHistory b = adapt_loop_steady(space, problem, interior_one(), opts);
    CHECK(write_history_csv(a) == write_history_csv(b));
}

TEST_CASE("p-mode adaptation raises orders where marked") {
    const PrimalProblem problem = catalog_case("diffusion_sine").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 6, 1), problem.kind);
    SteadyAdaptOptions opts;
    opts.mode = AdaptMode::P;
    opts.tolerance = 1e-12;
    opts.max_iterations = 3;
    opts.error_on_max_iterations = false;
    const AdaptiveHistory history =
        adapt_loop_steady(space, problem, interior_one(), opts);
    const Mesh1D& last = history.meshes.back();
    CHECK(last.n_elements() == 6); // geometry untouched
    int raised = 0;
    for (int e = 0; e < last.n_elements(); ++e)
        if (last.order(e) > 1) ++raised;
    CHECK(raised > 0);
}

TEST_CASE("L2Transfer: exact on representable functions, identity detection") {
    const DiscreteSpace a(uniform_mesh(0.0, 1.0, 4, 2), ProblemKind::SteadyAdvection);
    const DiscreteSpace b(uniform_mesh(0.0, 1.0, 6, 2), ProblemKind::SteadyAdvection);
    const L2Transfer t(a, b);
    CHECK(!t.identity());
    const Vector u = a.project([](double x, double) { return 1.0 + 2.0 * x - x * x; });
    const Vector v = t.apply(u);
    for (int i = 0; i <= 30; ++i) {
        const double x = i / 30.0;
        const double expect = 1.0 + 2.0 * x - x * x;
        CHECK(std::abs(b.eval_at(v, x) - expect) <= 1e-12);
    }
    const L2Transfer same(a, a);
    CHECK(same.identity());
}

TEST_CASE("march_slabs matches time_march on a uniform slab set") {
    const PrimalProblem problem = catalog_case("unsteady_decay").problem;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 6, 1), problem.kind);
    const SpaceTimeSolution traj = time_march(space, problem);
    SlabDiscretization slabs;
    const double dt = problem.final_time / problem.num_steps;
    for (int m = 0; m < problem.num_steps; ++m) {
        slabs.spaces.push_back(space);
        slabs.dts.push_back(dt);
    }
    const SlabSolution sol = march_slabs(slabs, problem);
    for (int m = 1; m <= problem.num_steps; ++m) {
        Vector d = sol.states[m - 1];
        axpy(-1.0, traj.at(m), d);
        CHECK(inf_norm(d) <= 1e-12);
    }
}

TEST_CASE("adapt_loop_unsteady: final-time output refines late slabs more") {
    PrimalProblem problem = catalog_case("unsteady_decay").problem;
    problem.num_steps = 12;
    OutputFunctional out;
    out.point_location = 0.7 - 1e-9;
    out.time_begin = out.time_end = problem.final_time;
    SlabDiscretization slabs;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 8, 1), problem.kind);
    const double dt = problem.final_time / problem.num_steps;
    for (int m = 0; m < problem.num_steps; ++m) {
        slabs.spaces.push_back(space);
        slabs.dts.push_back(dt);
    }
    UnsteadyAdaptOptions opts;
    opts.tolerance = 1e-12;
    opts.max_iterations = 2;
    opts.error_on_max_iterations = false;
    const AdaptiveHistory history = adapt_loop_unsteady(slabs, problem, out, opts);
    REQUIRE(!history.refined_per_step.empty());
    long early = 0, late = 0;
    for (const std::vector<int>& counts : history.refined_per_step) {
        const std::size_t third = counts.size() / 3;
        for (std::size_t m = 0; m < third; ++m) early += counts[m];
        for (std::size_t m = counts.size() - third; m < counts.size(); ++m)
            late += counts[m];
    }
    CHECK(late >= static_cast<long>(std::ceil(1.5 * std::max<long>(early, 1))));
}

TEST_CASE("adapt_loop_unsteady: temporally dominant case spends marks on steps") {
    PrimalProblem problem = catalog_case("unsteady_spatial_exact").problem;
    problem.num_steps = 6;
    OutputFunctional out = interior_one();
    out.time_begin = 0.0;
    out.time_end = problem.final_time;
    SlabDiscretization slabs;
    const DiscreteSpace space(uniform_mesh(0.0, 1.0, 5, 2), problem.kind);
    const double dt = problem.final_time / problem.num_steps;
    for (int m = 0; m < problem.num_steps; ++m) {
        slabs.spaces.push_back(space);
        slabs.dts.push_back(dt);
    }
    UnsteadyAdaptOptions opts;
    opts.tolerance = 1e-13;
    opts.max_iterations = 1;
    opts.error_on_max_iterations = false;
    const AdaptiveHistory history = adapt_loop_unsteady(slabs, problem, out, opts);
    // with the solution exactly representable in space, nearly every mark
    // should be temporal: count slabs that grew vs elements that split
    REQUIRE(history.records.size() >= 2);
    CHECK(history.records[1].estimate != history.records[0].estimate);
}

TEST_CASE("history CSV columns") {
    AdaptiveHistory history;
    AdaptiveRecord r;
    r.iteration = 0;
    r.dofs = 16;
    r.output = 0.5;
    r.estimate = 1e-3;
    r.corrected = 0.501;
    history.records.push_back(r);
    const std::string csv = write_history_csv(history);
    CHECK(csv.rfind("iter,dof,J,dJ_est,J_corrected,true_error_or_NA\n", 0) == 0);
    CHECK(csv.find("0,16,0.5,0.001,0.501,NA\n") != std::string::npos);
}

TEST_CASE("validate_plan enforces the mark invariants") {
    AdaptationPlan plan;
    plan.spatial = {Mark::Refine, Mark::Keep, Mark::Keep, Mark::Keep};
    CHECK_NOTHROW(validate_plan(plan, 0.25, 0.0));
    plan.spatial = {Mark::Refine, Mark::Refine, Mark::Refine, Mark::Keep};
    CHECK_THROWS_AS(validate_plan(plan, 0.25, 0.0), InvalidFraction);
    plan.spatial = {Mark::Keep, Mark::Keep};
    plan.temporal = {Mark::Coarsen, Mark::Coarsen, Mark::Keep};
    CHECK_NOTHROW(validate_plan(plan, 0.0, 0.7));
    plan.temporal = {Mark::Keep, Mark::Coarsen, Mark::Keep};
    CHECK_THROWS_AS(validate_plan(plan, 0.0, 0.7), InvalidFraction);
}

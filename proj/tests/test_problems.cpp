#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dwrlab/problems.hpp"
#include "dwrlab/quadrature.hpp"

using namespace dwrlab;

namespace {
OutputFunctional interior_one() {
    OutputFunctional out;
    out.interior_weight = [](double, double) { return 1.0; };
    return out;
}
} // namespace

TEST_CASE("compatibility: interior outputs always pass") {
    CHECK_NOTHROW(output_compatibility_check(catalog_case("advection_unit").problem,
                                             interior_one()));
}

TEST_CASE("compatibility: advection rejects left-boundary outputs") {
    OutputFunctional out;
    out.left_derivative_weight = 1.0;
    CHECK_THROWS_AS(output_compatibility_check(catalog_case("advection_unit").problem, out),
                    IncompatibleOutput);
    CHECK_THROWS_AS(output_compatibility_check(catalog_case("burgers_linear").problem, out),
                    IncompatibleOutput);
}

TEST_CASE("compatibility: diffusion boundary pair is the compatible form") {
    OutputFunctional out;
    out.right_boundary_weight = 1.0;
    out.left_derivative_weight = 1.0;
    CHECK_NOTHROW(output_compatibility_check(catalog_case("diffusion_quadratic").problem, out));
}

TEST_CASE("compatibility: empty and out-of-domain outputs rejected") {
    OutputFunctional none;
    CHECK_THROWS_AS(output_compatibility_check(catalog_case("advection_unit").problem, none),
                    IncompatibleOutput);
    OutputFunctional outside;
    outside.point_location = 1.5;
    CHECK_THROWS_AS(
        output_compatibility_check(catalog_case("advection_unit").problem, outside),
        IncompatibleOutput);
}

TEST_CASE("analytic_primal: catalog closed forms") {
    {
        const AnalyticSolution s = analytic_primal(catalog_case("advection_unit").problem);
        CHECK(s.u(0.37, 0.0) == doctest::Approx(0.37).epsilon(1e-15));
    }
    {
        const AnalyticSolution s = analytic_primal(catalog_case("diffusion_quadratic").problem);
        CHECK(s.u(0.5, 0.0) == doctest::Approx(0.75).epsilon(1e-15));
    }
    {
        const AnalyticSolution s = analytic_primal(catalog_case("burgers_linear").problem);
        CHECK(s.u(0.25, 0.0) == doctest::Approx(1.25).epsilon(1e-15));
    }
}

TEST_CASE("analytic_primal: parametric constant-source families") {
    PrimalProblem p;
    p.kind = ProblemKind::SteadyAdvection;
    p.advection_speed = 2.0;
    p.dirichlet_left = 0.5;
    p.source = [](double, double) { return 3.0; };
    const AnalyticSolution s = analytic_primal(p);
    // a u' = 3, u(0) = 0.5 -> u = 0.5 + 1.5 x
    CHECK(s.u(1.0, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("analytic_primal: non-catalog data raises NotAvailable") {
    PrimalProblem p;
    p.kind = ProblemKind::SteadyAdvection;
    p.advection_speed = 1.0;
    p.source = [](double x, double) { return std::sin(7.3 * x * x); };
    CHECK_THROWS_AS(analytic_primal(p), NotAvailable);
}

TEST_CASE("analytic_adjoint: advection interior weight") {
    const AnalyticSolution s =
        analytic_adjoint(catalog_case("advection_unit").problem, interior_one());
    for (double x : {0.0, 0.25, 0.8, 1.0})
        CHECK(s.adjoint(x) == doctest::Approx(1.0 - x).epsilon(1e-12));
}

TEST_CASE("analytic_adjoint: advection point output is the step function") {
    OutputFunctional out;
    out.point_location = 0.5;
    const AnalyticSolution s =
        analytic_adjoint(catalog_case("advection_unit").problem, out);
    CHECK(s.adjoint(0.2) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(s.adjoint(0.499) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(s.adjoint(0.501) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(s.adjoint(0.9) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("analytic_adjoint: diffusion right-boundary weight gives psi = x") {
    OutputFunctional out;
    out.right_boundary_weight = 1.0;
    const AnalyticSolution s =
        analytic_adjoint(catalog_case("diffusion_quadratic").problem, out);
    for (double x : {0.0, 0.3, 0.7, 1.0})
        CHECK(s.adjoint(x) == doctest::Approx(x).epsilon(1e-11));
}

TEST_CASE("analytic_adjoint: Burgers is not in the linear catalog") {
    CHECK_THROWS_AS(analytic_adjoint(catalog_case("burgers_linear").problem, interior_one()),
                    NotAvailable);
}

TEST_CASE("dual_form_value: advection examples") {
    const PrimalProblem p = catalog_case("advection_unit").problem;
    {
        // u = x, g = 1, psi = 1 - x: (psi, f) = 1/2 = J
        const double v = dual_form_value(p, interior_one(),
                                         [](double x) { return 1.0 - x; });
        CHECK(v == doctest::Approx(0.5).epsilon(1e-13));
    }
    {
        OutputFunctional out;
        out.point_location = 0.5;
        const double v = dual_form_value(
            p, out, [](double x) { return x < 0.5 ? 1.0 : 0.0; });
        CHECK(v == doctest::Approx(0.5).epsilon(1e-13));
    }
    {
        PrimalProblem zero = p;
        zero.source = [](double, double) { return 0.0; };
        zero.dirichlet_left = 0.0;
        const double v = dual_form_value(zero, interior_one(),
                                         [](double x) { return 1.0 - x; });
        CHECK(std::abs(v) <= 1e-15);
    }
}

TEST_CASE("dual-form equality against (g, u) + boundary terms") {
    // advection catalog pairs: |(g,u) + g_R u(xR) - dual_form_value| <= 1e-12
    std::vector<std::string> ids = {"advection_unit", "advection_sine", "advection_bump"};
    for (const std::string& id : ids) {
        const CatalogCase& c = catalog_case(id);
        for (int variant = 0; variant < 3; ++variant) {
            OutputFunctional out;
            if (variant == 0) out = interior_one();
            if (variant == 1) out.point_location = 0.5;
            if (variant == 2) out.right_boundary_weight = 2.0;
            const AnalyticSolution primal = analytic_primal(c.problem);
            const AnalyticSolution adjoint = analytic_adjoint(c.problem, out);
            const double direct = analytic_output(c.problem, out);
            const double dual = dual_form_value(c.problem, out, adjoint.adjoint);
            CHECK(std::abs(direct - dual) <= 1e-12 * std::max(1.0, std::abs(direct)));
            (void)primal;
        }
    }
}

TEST_CASE("catalog residual invariant at random interior points") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(0.02, 0.98);
    for (const CatalogCase& c : catalog()) {
        if (is_unsteady(c.problem.kind)) continue;
        const AnalyticSolution s = analytic_primal(c.problem);
        for (int i = 0; i < 30; ++i) {
            const double x = c.problem.x_left +
                             dist(rng) * (c.problem.x_right - c.problem.x_left);
            CHECK(std::abs(continuous_residual(c.problem, s, x)) <= 1e-12);
        }
    }
}

TEST_CASE("advection point-output adjoint vanishes downstream") {
    OutputFunctional out;
    out.point_location = 0.4;
    const AnalyticSolution s =
        analytic_adjoint(catalog_case("advection_sine").problem, out);
    for (double x : {0.41, 0.6, 0.85, 0.99})
        CHECK(std::abs(s.adjoint(x)) <= 1e-13);
}

TEST_CASE("problem validation") {
    PrimalProblem p;
    p.kind = ProblemKind::SteadyAdvection;
    p.advection_speed = -1.0;
    p.source = [](double, double) { return 1.0; };
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.advection_speed = 1.0;
    CHECK_NOTHROW(p.validate());
    PrimalProblem u = catalog_case("unsteady_decay").problem;
    u.num_steps = 0;
    CHECK_THROWS_AS(u.validate(), ValidationError);
}

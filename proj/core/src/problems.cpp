#include "dwrlab/problems.hpp"

#include <cmath>

#include "dwrlab/quadrature.hpp"

namespace dwrlab {

bool is_unsteady(ProblemKind kind) { return kind == ProblemKind::UnsteadyAdvectionDiffusion; }

std::string to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::SteadyAdvection: return "advection";
        case ProblemKind::SteadyDiffusion: return "diffusion";
        case ProblemKind::SteadyBurgers: return "burgers";
        case ProblemKind::UnsteadyAdvectionDiffusion: return "unsteady_advection_diffusion";
    }
    return "?";
}

bool PrimalProblem::has_advection() const {
    return kind == ProblemKind::SteadyAdvection ||
           kind == ProblemKind::UnsteadyAdvectionDiffusion;
}

bool PrimalProblem::has_diffusion() const {
    return kind == ProblemKind::SteadyDiffusion ||
           kind == ProblemKind::UnsteadyAdvectionDiffusion;
}

void PrimalProblem::validate() const {
    if (!(x_left < x_right))
        throw InvalidBounds("problem: requires x_left < x_right");
    if (has_advection() && !(advection_speed > 0.0))
        throw ValidationError("a", "advection speed must be positive (left inflow)");
    if (has_diffusion() && !(diffusivity > 0.0))
        throw ValidationError("nu", "diffusivity must be positive");
    if (is_unsteady(kind)) {
        if (!(final_time > 0.0))
            throw ValidationError("T", "final time must be positive");
        if (num_steps < 1)
            throw ValidationError("N_t", "step count must be >= 1");
        if (!initial_condition)
            throw ValidationError("u0", "initial condition required");
    }
    if (!source)
        throw ValidationError("f", "source required");
}

bool OutputFunctional::any_active() const {
    return static_cast<bool>(interior_weight) || point_location.has_value() ||
           right_boundary_weight != 0.0 || left_derivative_weight != 0.0 || quadratic_flux;
}

void output_compatibility_check(const PrimalProblem& problem, const OutputFunctional& output) {
    if (!output.any_active())
        throw IncompatibleOutput("output: no active component");
    if (!std::isfinite(output.right_boundary_weight) ||
        !std::isfinite(output.left_derivative_weight))
        throw IncompatibleOutput("output: boundary weights must be finite");
    if (output.left_derivative_weight != 0.0 && !problem.has_diffusion())
        throw IncompatibleOutput(
            "output: left-boundary terms are not available for advection; the left state "
            "is prescribed by the inflow condition and cannot appear in an unknown output");
    if (output.point_location) {
        const double xp = *output.point_location;
        if (!(problem.x_left < xp && xp < problem.x_right))
            throw IncompatibleOutput("output: point location must be strictly interior");
    }
    if (is_unsteady(problem.kind)) {
        if (output.time_begin > output.time_end)
            throw IncompatibleOutput("output: time window reversed");
        if (output.time_begin < 0.0 || output.time_end > problem.final_time)
            throw IncompatibleOutput("output: time window outside [0, T]");
    }
}

namespace {

constexpr double kMatchTol = 1e-9;

bool values_close(double a, double b, double tol = 1e-12) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool fields_match(const ScalarField& a, const ScalarField& b, const PrimalProblem& p) {
    if (!a || !b) return false;
    std::vector<double> times = {0.0};
    if (is_unsteady(p.kind)) times = {0.0, 0.37 * p.final_time, p.final_time};
    for (double t : times) {
        for (int i = 0; i <= 16; ++i) {
            const double x = p.x_left + (p.x_right - p.x_left) * (i + 0.31) / 17.3;
            const double va = a(x, t);
            const double vb = b(x, t);
            if (std::abs(va - vb) > kMatchTol * std::max({1.0, std::abs(va), std::abs(vb)}))
                return false;
        }
    }
    return true;
}

bool field_constant(const ScalarField& f, const PrimalProblem& p, double& value) {
    if (!f) return false;
    value = f(p.x_left + 0.123456 * (p.x_right - p.x_left), 0.0);
    ScalarField c = [value](double, double) { return value; };
    return fields_match(f, c, p);
}

bool problems_match(const PrimalProblem& a, const PrimalProblem& b) {
    if (a.kind != b.kind) return false;
    if (!values_close(a.x_left, b.x_left) || !values_close(a.x_right, b.x_right)) return false;
    if (a.has_advection() && !values_close(a.advection_speed, b.advection_speed)) return false;
    if (a.has_diffusion() && !values_close(a.diffusivity, b.diffusivity)) return false;
    if (!values_close(a.dirichlet_left, b.dirichlet_left)) return false;
    if (a.has_diffusion() && !values_close(a.neumann_right, b.neumann_right)) return false;
    if (is_unsteady(a.kind)) {
        if (!values_close(a.final_time, b.final_time)) return false;
        if (!fields_match(a.initial_condition, b.initial_condition, a)) return false;
    }
    return fields_match(a.source, b.source, a);
}

} // namespace

const std::vector<CatalogCase>& catalog() {
    static const std::vector<CatalogCase> cases = [] {
        std::vector<CatalogCase> list;
        const double pi = M_PI;

        {
            CatalogCase c;
            c.id = "advection_unit";
            c.problem.kind = ProblemKind::SteadyAdvection;
            c.problem.advection_speed = 1.0;
            c.problem.source = [](double, double) { return 1.0; };
            c.problem.dirichlet_left = 0.0;
            c.solution.u = [](double x, double) { return x; };
            c.solution.u_x = [](double, double) { return 1.0; };
            c.solution.u_xx = [](double, double) { return 0.0; };
            list.push_back(std::move(c));
        }
        {
            CatalogCase c;
            c.id = "advection_sine";
            c.problem.kind = ProblemKind::SteadyAdvection;
            c.problem.advection_speed = 1.0;
            c.problem.source = [pi](double x, double) { return pi * std::cos(pi * x); };
            c.problem.dirichlet_left = 0.0;
            c.solution.u = [pi](double x, double) { return std::sin(pi * x); };
            c.solution.u_x = [pi](double x, double) { return pi * std::cos(pi * x); };
            c.solution.u_xx = [pi](double x, double) { return -pi * pi * std::sin(pi * x); };
            list.push_back(std::move(c));
        }
        {
            // Localized source feature upstream of the usual point output.
            const double amp = 50.0, center = 0.25, width = 0.04;
            CatalogCase c;
            c.id = "advection_bump";
            c.problem.kind = ProblemKind::SteadyAdvection;
            c.problem.advection_speed = 1.0;
            c.problem.source = [=](double x, double) {
                const double s = (x - center) / width;
                return 1.0 + amp * std::exp(-s * s);
            };
            c.problem.dirichlet_left = 0.0;
            c.solution.u = [=](double x, double) {
                const double scale = amp * width * std::sqrt(M_PI) / 2.0;
                return x + scale * (std::erf((x - center) / width) + std::erf(center / width));
            };
            c.solution.u_x = c.problem.source;
            c.solution.u_xx = [=](double x, double) {
                const double s = (x - center) / width;
                return amp * std::exp(-s * s) * (-2.0 * s / width);
            };
            list.push_back(std::move(c));
        }
        {
            CatalogCase c;
            c.id = "diffusion_quadratic";
            c.problem.kind = ProblemKind::SteadyDiffusion;
            c.problem.diffusivity = 1.0;
            c.problem.source = [](double, double) { return 2.0; };
            c.problem.dirichlet_left = 0.0;
            c.problem.neumann_right = 0.0;
            c.solution.u = [](double x, double) { return 2.0 * x - x * x; };
            c.solution.u_x = [](double x, double) { return 2.0 - 2.0 * x; };
            c.solution.u_xx = [](double, double) { return -2.0; };
            list.push_back(std::move(c));
        }
        {
            CatalogCase c;
            c.id = "diffusion_sine";
            c.problem.kind = ProblemKind::SteadyDiffusion;
            c.problem.diffusivity = 1.0;
            c.problem.source = [pi](double x, double) {
                const double k = 0.5 * pi;
                return k * k * std::sin(k * x);
            };
            c.problem.dirichlet_left = 0.0;
            c.problem.neumann_right = 0.0;
            c.solution.u = [pi](double x, double) { return std::sin(0.5 * pi * x); };
            c.solution.u_x = [pi](double x, double) {
                return 0.5 * pi * std::cos(0.5 * pi * x);
            };
            c.solution.u_xx = [pi](double x, double) {
                return -0.25 * pi * pi * std::sin(0.5 * pi * x);
            };
            list.push_back(std::move(c));
        }
        {
            CatalogCase c;
            c.id = "burgers_linear";
            c.problem.kind = ProblemKind::SteadyBurgers;
            c.problem.source = [](double x, double) {
                return (1.0 + x) + std::pow(1.0 + x, 3);
            };
            c.problem.dirichlet_left = 1.0;
            c.solution.u = [](double x, double) { return 1.0 + x; };
            c.solution.u_x = [](double, double) { return 1.0; };
            c.solution.u_xx = [](double, double) { return 0.0; };
            list.push_back(std::move(c));
        }
        {
            CatalogCase c;
            c.id = "burgers_sine";
            c.problem.kind = ProblemKind::SteadyBurgers;
            const double amp = 0.45, freq = 2.2, phase = 1.1;
            auto u = [=](double x, double) { return 1.0 + amp * std::sin(freq * x + phase); };
            auto ux = [=](double x, double) { return amp * freq * std::cos(freq * x + phase); };
            c.problem.source = [=](double x, double) {
                const double v = u(x, 0.0);
                return v * ux(x, 0.0) + v * v * v;
            };
            c.problem.dirichlet_left = u(0.0, 0.0);
            c.solution.u = u;
            c.solution.u_x = ux;
            c.solution.u_xx = [=](double x, double) {
                return -amp * freq * freq * std::sin(freq * x + phase);
            };
            list.push_back(std::move(c));
        }
        {
            CatalogCase c;
            c.id = "unsteady_decay";
            c.problem.kind = ProblemKind::UnsteadyAdvectionDiffusion;
            c.problem.advection_speed = 1.0;
            c.problem.diffusivity = 0.5;
            const double k = 0.5 * pi;
            const double a = 1.0, nu = 0.5;
            c.problem.source = [=](double x, double t) {
                return std::exp(-t) * (-std::sin(k * x) + a * k * std::cos(k * x) +
                                       nu * k * k * std::sin(k * x));
            };
            c.problem.dirichlet_left = 0.0;
            c.problem.neumann_right = 0.0;
            c.problem.initial_condition = [=](double x, double) { return std::sin(k * x); };
            c.problem.final_time = 1.0;
            c.problem.num_steps = 10;
            c.solution.u = [=](double x, double t) { return std::exp(-t) * std::sin(k * x); };
            c.solution.u_x = [=](double x, double t) {
                return std::exp(-t) * k * std::cos(k * x);
            };
            c.solution.u_xx = [=](double x, double t) {
                return -std::exp(-t) * k * k * std::sin(k * x);
            };
            list.push_back(std::move(c));
        }
        {
            // Quadratic-in-x manufactured case: exact on p >= 2 spaces at
            // every time, so the discretization error is purely temporal.
            CatalogCase c;
            c.id = "unsteady_spatial_exact";
            c.problem.kind = ProblemKind::UnsteadyAdvectionDiffusion;
            const double a = 1.0, nu = 0.25;
            c.problem.advection_speed = a;
            c.problem.diffusivity = nu;
            c.problem.source = [=](double x, double t) {
                const double e = std::exp(-t);
                return -e * (0.5 * x * x - x) + a * (1.0 + e * (x - 1.0)) - nu * e;
            };
            c.problem.dirichlet_left = 0.0;
            c.problem.neumann_right = 1.0;
            c.problem.initial_condition = [](double x, double) { return 0.5 * x * x; };
            c.problem.final_time = 1.0;
            c.problem.num_steps = 10;
            c.solution.u = [](double x, double t) {
                return x + std::exp(-t) * (0.5 * x * x - x);
            };
            c.solution.u_x = [](double x, double t) {
                return 1.0 + std::exp(-t) * (x - 1.0);
            };
            c.solution.u_xx = [](double, double t) { return std::exp(-t); };
            list.push_back(std::move(c));
        }
        return list;
    }();
    return cases;
}

const CatalogCase& catalog_case(const std::string& id) {
    for (const CatalogCase& c : catalog())
        if (c.id == id) return c;
    throw NotAvailable("catalog case not found: " + id);
}

AnalyticSolution analytic_primal(const PrimalProblem& problem) {
    for (const CatalogCase& c : catalog())
        if (problems_match(problem, c.problem)) return c.solution;

    // Parametric families with constant source data.
    double c = 0.0;
    if (problem.kind == ProblemKind::SteadyAdvection && field_constant(problem.source, problem, c)) {
        const double a = problem.advection_speed;
        const double ul = problem.dirichlet_left;
        const double xl = problem.x_left;
        AnalyticSolution s;
        s.u = [=](double x, double) { return ul + c * (x - xl) / a; };
        s.u_x = [=](double, double) { return c / a; };
        s.u_xx = [](double, double) { return 0.0; };
        return s;
    }
    if (problem.kind == ProblemKind::SteadyDiffusion && field_constant(problem.source, problem, c)) {
        const double nu = problem.diffusivity;
        const double ul = problem.dirichlet_left;
        const double uxr = problem.neumann_right;
        const double xl = problem.x_left, xr = problem.x_right;
        AnalyticSolution s;
        s.u = [=](double x, double) {
            return ul + uxr * (x - xl) +
                   (c / nu) * (xr * (x - xl) - 0.5 * (x * x - xl * xl));
        };
        s.u_x = [=](double x, double) { return uxr + (c / nu) * (xr - x); };
        s.u_xx = [=](double, double) { return -c / nu; };
        return s;
    }
    throw NotAvailable("analytic_primal: problem is not a catalog case");
}

AnalyticSolution analytic_adjoint(const PrimalProblem& problem, const OutputFunctional& output) {
    output_compatibility_check(problem, output);
    if (output.quadratic_flux)
        throw NotAvailable("analytic_adjoint: nonlinear outputs not in the linear catalog");

    if (problem.kind == ProblemKind::SteadyAdvection) {
        const double a = problem.advection_speed;
        const double xr = problem.x_right;
        const ScalarField g = output.interior_weight;
        const double gr = output.right_boundary_weight;
        const std::optional<double> xp = output.point_location;
        AnalyticSolution s;
        s.adjoint = [=](double x) {
            double v = gr;
            if (g) v += integrate([&](double y) { return g(y, 0.0); }, x, xr);
            if (xp && x < *xp) v += 1.0;
            return v / a;
        };
        return s;
    }
    if (problem.kind == ProblemKind::SteadyDiffusion) {
        const double nu = problem.diffusivity;
        const double xl = problem.x_left, xr = problem.x_right;
        const ScalarField g = output.interior_weight;
        const double gr = output.right_boundary_weight;
        const double gl = output.left_derivative_weight;
        const std::optional<double> xp = output.point_location;
        // psi'(x) = g_R/nu + (1/nu) int_x^{xR} g + step at x_p; psi(xL) = g_L/nu
        auto psi_prime = [=](double x) {
            double v = gr;
            if (g) v += integrate([&](double y) { return g(y, 0.0); }, x, xr);
            if (xp && x < *xp) v += 1.0;
            return v / nu;
        };
        AnalyticSolution s;
        s.adjoint = [=](double x) {
            return gl / nu + integrate(psi_prime, xl, x, 24, 12);
        };
        return s;
    }
    throw NotAvailable("analytic_adjoint: only steady linear problems have catalog adjoints");
}

namespace {

double output_at_time(const PrimalProblem& problem, const OutputFunctional& output,
                      const AnalyticSolution& sol, double t) {
    double j = 0.0;
    if (output.interior_weight) {
        j += integrate([&](double x) { return output.interior_weight(x, t) * sol.u(x, t); },
                       problem.x_left, problem.x_right, 48, 12);
    }
    if (output.point_location) j += sol.u(*output.point_location, t);
    if (output.right_boundary_weight != 0.0)
        j += output.right_boundary_weight * sol.u(problem.x_right, t);
    if (output.left_derivative_weight != 0.0) {
        double d = 0.0;
        if (sol.u_x) {
            d = sol.u_x(problem.x_left, t);
        } else {
            // fourth-order one-sided fallback
            const double h = 1e-4 * (problem.x_right - problem.x_left);
            const double x0 = problem.x_left;
            d = (-25.0 * sol.u(x0, t) + 48.0 * sol.u(x0 + h, t) - 36.0 * sol.u(x0 + 2 * h, t) +
                 16.0 * sol.u(x0 + 3 * h, t) - 3.0 * sol.u(x0 + 4 * h, t)) /
                (12.0 * h);
        }
        j += output.left_derivative_weight * d;
    }
    if (output.quadratic_flux) {
        const double ur = sol.u(problem.x_right, t);
        j += 0.5 * ur * ur;
    }
    return j;
}

} // namespace

double analytic_output(const PrimalProblem& problem, const OutputFunctional& output) {
    const AnalyticSolution sol = analytic_primal(problem);
    if (!sol.u)
        throw NotAvailable("analytic_output: no closed-form primal");
    if (!is_unsteady(problem.kind)) return output_at_time(problem, output, sol, 0.0);
    if (output.time_begin == output.time_end)
        return output_at_time(problem, output, sol, output.time_end);
    return integrate([&](double t) { return output_at_time(problem, output, sol, t); },
                     output.time_begin, output.time_end, 32, 12);
}

double dual_form_value(const PrimalProblem& problem, const OutputFunctional& output,
                       const std::function<double(double)>& psi) {
    if (problem.kind != ProblemKind::SteadyAdvection)
        throw NotAvailable("dual_form_value: defined for linear advection");
    const double a = problem.advection_speed;
    auto integrand = [&](double x) { return psi(x) * problem.source(x, 0.0); };
    double v = 0.0;
    if (output.point_location) {
        // integrate piecewise so the adjoint's step is never straddled
        v += integrate(integrand, problem.x_left, *output.point_location);
        v += integrate(integrand, *output.point_location, problem.x_right);
    } else {
        v += integrate(integrand, problem.x_left, problem.x_right);
    }
    v += psi(problem.x_left) * a * problem.dirichlet_left;
    return v;
}

double continuous_residual(const PrimalProblem& problem, const AnalyticSolution& sol, double x) {
    auto u = [&](double y) { return sol.u(y, 0.0); };
    const double h = 1e-4 * (problem.x_right - problem.x_left);
    const double up =
        sol.u_x ? sol.u_x(x, 0.0)
                : (u(x - 2 * h) - 8.0 * u(x - h) + 8.0 * u(x + h) - u(x + 2 * h)) / (12.0 * h);
    const double upp =
        sol.u_xx
            ? sol.u_xx(x, 0.0)
            : (-u(x - 2 * h) + 16.0 * u(x - h) - 30.0 * u(x) + 16.0 * u(x + h) - u(x + 2 * h)) /
                  (12.0 * h * h);
    const double f = problem.source(x, 0.0);
    switch (problem.kind) {
        case ProblemKind::SteadyAdvection:
            return problem.advection_speed * up - f;
        case ProblemKind::SteadyDiffusion:
            return -problem.diffusivity * upp - f;
        case ProblemKind::SteadyBurgers:
            return u(x) * up + std::pow(u(x), 3) - f;
        default:
            throw NotAvailable("continuous_residual: steady problems only");
    }
}

} // namespace dwrlab

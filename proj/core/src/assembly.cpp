#include "dwrlab/assembly.hpp"

#include <cmath>

#include "dwrlab/basis.hpp"

namespace dwrlab {

namespace {

struct Trace {
    double value = 0.0;
    double deriv = 0.0;
};

Trace left_trace(const DiscreteSpace& space, const Vector& u, int e) {
    const ElementTables& t = space.tables(e);
    const int n = space.n_local(e);
    const double scale = 2.0 / space.mesh().element_size(e);
    Trace tr;
    for (int j = 0; j < n; ++j) {
        const double c = u[space.dof_start(e) + j];
        tr.value += c * t.phi_left[j];
        tr.deriv += c * t.dphi_left[j];
    }
    tr.deriv *= scale;
    return tr;
}

Trace right_trace(const DiscreteSpace& space, const Vector& u, int e) {
    const ElementTables& t = space.tables(e);
    const int n = space.n_local(e);
    const double scale = 2.0 / space.mesh().element_size(e);
    Trace tr;
    for (int j = 0; j < n; ++j) {
        const double c = u[space.dof_start(e) + j];
        tr.value += c * t.phi_right[j];
        tr.deriv += c * t.dphi_right[j];
    }
    tr.deriv *= scale;
    return tr;
}

// Lax-Friedrichs flux for f(u) = u^2/2 with local wave speed max(|ul|, |ur|),
// and its derivatives. Ties take the left branch.
struct LfFlux {
    double value;
    double d_ul;
    double d_ur;
};

LfFlux lax_friedrichs(double ul, double ur) {
    const double lambda = 0.5 * (std::abs(ul) + std::abs(ur));
    LfFlux f;
    f.value = 0.25 * (ul * ul + ur * ur) - 0.5 * lambda * (ur - ul);
    const double dl_ul = 0.5 * (ul >= 0.0 ? 1.0 : -1.0);
    const double dl_ur = 0.5 * (ur >= 0.0 ? 1.0 : -1.0);
    f.d_ul = 0.5 * ul - 0.5 * dl_ul * (ur - ul) + 0.5 * lambda;
    f.d_ur = 0.5 * ur - 0.5 * dl_ur * (ur - ul) - 0.5 * lambda;
    return f;
}

void check_state(const DiscreteSpace& space, const Vector& u, const char* where) {
    if (static_cast<int>(u.size()) != space.n_dofs())
        throw DimensionMismatch(std::string(where) + ": state size mismatch");
}

} // namespace

Vector assemble_residual(const DiscreteSpace& space, const PrimalProblem& problem,
                         const Vector& u, double t) {
    check_state(space, u, "assemble_residual");
    const Mesh1D& mesh = space.mesh();
    const int ne = space.n_elements();
    Vector r(space.n_dofs(), 0.0);

    const bool advection = problem.has_advection();
    const bool diffusion = problem.has_diffusion();
    const bool burgers = problem.kind == ProblemKind::SteadyBurgers;
    const double a = problem.advection_speed;
    const double nu = problem.diffusivity;

    // volume terms
    for (int e = 0; e < ne; ++e) {
        const ElementTables& tab = space.tables(e);
        const int n = space.n_local(e);
        const int base = space.dof_start(e);
        const double h = mesh.element_size(e);
        const double xl = mesh.element_left(e);
        const double dscale = 2.0 / h;
        for (int q = 0; q < tab.quad.size(); ++q) {
            const double w = 0.5 * h * tab.quad.weights[q];
            const double x = xl + 0.5 * h * (tab.quad.points[q] + 1.0);
            double uq = 0.0, duq = 0.0;
            for (int j = 0; j < n; ++j) {
                uq += u[base + j] * tab.phi[q * n + j];
                duq += u[base + j] * tab.dphi[q * n + j];
            }
            duq *= dscale;
            const double fq = problem.source(x, t);
            for (int i = 0; i < n; ++i) {
                const double phi = tab.phi[q * n + i];
                const double dphi = tab.dphi[q * n + i] * dscale;
                double val = -fq * phi;
                if (advection) val += -a * uq * dphi;
                if (diffusion) val += nu * duq * dphi;
                if (burgers) val += -0.5 * uq * uq * dphi + uq * uq * uq * phi;
                r[base + i] += w * val;
            }
        }
    }

    // face terms
    for (int f = 0; f <= ne; ++f) {
        const int eL = f - 1;
        const int eR = f;
        const bool have_left = eL >= 0;
        const bool have_right = eR < ne;
        const Trace tl = have_left ? right_trace(space, u, eL) : Trace{};
        const Trace tr = have_right ? left_trace(space, u, eR) : Trace{};

        if (advection) {
            // full upwinding, a > 0: face value from the left, inflow data at x_L
            const double upw = have_left ? tl.value : problem.dirichlet_left;
            if (have_left) {
                const ElementTables& tab = space.tables(eL);
                const int n = space.n_local(eL);
                for (int i = 0; i < n; ++i)
                    r[space.dof_start(eL) + i] += a * upw * tab.phi_right[i];
            }
            if (have_right) {
                const ElementTables& tab = space.tables(eR);
                const int n = space.n_local(eR);
                for (int i = 0; i < n; ++i)
                    r[space.dof_start(eR) + i] -= a * upw * tab.phi_left[i];
            }
        }

        if (diffusion) {
            const double mu = nu * space.face_penalty(f);
            if (have_left && have_right) {
                const double ju = tl.value - tr.value;
                const double avg_du = 0.5 * (tl.deriv + tr.deriv);
                const double hl = mesh.element_size(eL);
                const double hr = mesh.element_size(eR);
                {
                    const ElementTables& tab = space.tables(eL);
                    const int n = space.n_local(eL);
                    for (int i = 0; i < n; ++i) {
                        const double phi = tab.phi_right[i];
                        const double dphi = tab.dphi_right[i] * 2.0 / hl;
                        r[space.dof_start(eL) + i] +=
                            -nu * avg_du * phi - 0.5 * nu * dphi * ju + mu * ju * phi;
                    }
                }
                {
                    const ElementTables& tab = space.tables(eR);
                    const int n = space.n_local(eR);
                    for (int i = 0; i < n; ++i) {
                        const double phi = -tab.phi_left[i]; // jump orientation
                        const double dphi = tab.dphi_left[i] * 2.0 / hr;
                        r[space.dof_start(eR) + i] +=
                            -nu * avg_du * phi - 0.5 * nu * dphi * ju + mu * ju * phi;
                    }
                }
            } else if (!have_left) {
                // Dirichlet boundary via penalty + consistency terms
                const double diff = tr.value - problem.dirichlet_left;
                const ElementTables& tab = space.tables(eR);
                const int n = space.n_local(eR);
                const double hr = mesh.element_size(eR);
                for (int i = 0; i < n; ++i) {
                    const double phi = tab.phi_left[i];
                    const double dphi = tab.dphi_left[i] * 2.0 / hr;
                    r[space.dof_start(eR) + i] +=
                        nu * tr.deriv * phi + nu * dphi * diff + mu * diff * phi;
                }
            } else {
                // Neumann boundary: flux replaced by the prescribed value
                const ElementTables& tab = space.tables(eL);
                const int n = space.n_local(eL);
                for (int i = 0; i < n; ++i)
                    r[space.dof_start(eL) + i] -= nu * problem.neumann_right * tab.phi_right[i];
            }
        }

        if (burgers) {
            double flux = 0.0;
            if (have_left && have_right)
                flux = lax_friedrichs(tl.value, tr.value).value;
            else if (!have_left)
                flux = lax_friedrichs(problem.dirichlet_left, tr.value).value;
            else
                flux = 0.5 * tl.value * tl.value; // outflow: interior flux
            if (have_left) {
                const ElementTables& tab = space.tables(eL);
                const int n = space.n_local(eL);
                for (int i = 0; i < n; ++i)
                    r[space.dof_start(eL) + i] += flux * tab.phi_right[i];
            }
            if (have_right) {
                const ElementTables& tab = space.tables(eR);
                const int n = space.n_local(eR);
                for (int i = 0; i < n; ++i)
                    r[space.dof_start(eR) + i] -= flux * tab.phi_left[i];
            }
        }
    }
    return r;
}

SparseMatrix assemble_jacobian(const DiscreteSpace& space, const PrimalProblem& problem,
                               const Vector& u) {
    check_state(space, u, "assemble_jacobian");
    const Mesh1D& mesh = space.mesh();
    const int ne = space.n_elements();
    std::vector<Triplet> trip;

    const bool advection = problem.has_advection();
    const bool diffusion = problem.has_diffusion();
    const bool burgers = problem.kind == ProblemKind::SteadyBurgers;
    const double a = problem.advection_speed;
    const double nu = problem.diffusivity;

    for (int e = 0; e < ne; ++e) {
        const ElementTables& tab = space.tables(e);
        const int n = space.n_local(e);
        const int base = space.dof_start(e);
        const double h = mesh.element_size(e);
        const double dscale = 2.0 / h;
        for (int q = 0; q < tab.quad.size(); ++q) {
            const double w = 0.5 * h * tab.quad.weights[q];
            double uq = 0.0;
            if (burgers)
                for (int j = 0; j < n; ++j) uq += u[base + j] * tab.phi[q * n + j];
            for (int i = 0; i < n; ++i) {
                const double phi_i = tab.phi[q * n + i];
                const double dphi_i = tab.dphi[q * n + i] * dscale;
                for (int j = 0; j < n; ++j) {
                    const double phi_j = tab.phi[q * n + j];
                    const double dphi_j = tab.dphi[q * n + j] * dscale;
                    double val = 0.0;
                    if (advection) val += -a * phi_j * dphi_i;
                    if (diffusion) val += nu * dphi_j * dphi_i;
                    if (burgers)
                        val += -uq * phi_j * dphi_i + 3.0 * uq * uq * phi_j * phi_i;
                    if (val != 0.0) trip.push_back({base + i, base + j, w * val});
                }
            }
        }
    }

    for (int f = 0; f <= ne; ++f) {
        const int eL = f - 1;
        const int eR = f;
        const bool have_left = eL >= 0;
        const bool have_right = eR < ne;

        if (advection && have_left) {
            // d(upwind)/d(left-element coefficients)
            const ElementTables& tabL = space.tables(eL);
            const int nL = space.n_local(eL);
            for (int j = 0; j < nL; ++j) {
                const double dupw = tabL.phi_right[j];
                for (int i = 0; i < nL; ++i)
                    trip.push_back({space.dof_start(eL) + i, space.dof_start(eL) + j,
                                    a * dupw * tabL.phi_right[i]});
                if (have_right) {
                    const ElementTables& tabR = space.tables(eR);
                    const int nR = space.n_local(eR);
                    for (int i = 0; i < nR; ++i)
                        trip.push_back({space.dof_start(eR) + i, space.dof_start(eL) + j,
                                        -a * dupw * tabR.phi_left[i]});
                }
            }
        }

        if (diffusion) {
            const double mu = nu * space.face_penalty(f);
            if (have_left && have_right) {
                const double hl = mesh.element_size(eL);
                const double hr = mesh.element_size(eR);
                const ElementTables& tabL = space.tables(eL);
                const ElementTables& tabR = space.tables(eR);
                const int nL = space.n_local(eL);
                const int nR = space.n_local(eR);
                // trial contributions to (jump, average)
                auto add_terms = [&](int row, double phi, double dphi) {
                    // phi here already carries the jump orientation of the test fn
                    for (int j = 0; j < nL; ++j) {
                        const double d_ju = tabL.phi_right[j];
                        const double d_avg = 0.5 * tabL.dphi_right[j] * 2.0 / hl;
                        trip.push_back({row, space.dof_start(eL) + j,
                                        -nu * d_avg * phi - 0.5 * nu * dphi * d_ju +
                                            mu * d_ju * phi});
                    }
                    for (int j = 0; j < nR; ++j) {
                        const double d_ju = -tabR.phi_left[j];
                        const double d_avg = 0.5 * tabR.dphi_left[j] * 2.0 / hr;
                        trip.push_back({row, space.dof_start(eR) + j,
                                        -nu * d_avg * phi - 0.5 * nu * dphi * d_ju +
                                            mu * d_ju * phi});
                    }
                };
                for (int i = 0; i < nL; ++i)
                    add_terms(space.dof_start(eL) + i, tabL.phi_right[i],
                              tabL.dphi_right[i] * 2.0 / hl);
                for (int i = 0; i < nR; ++i)
                    add_terms(space.dof_start(eR) + i, -tabR.phi_left[i],
                              tabR.dphi_left[i] * 2.0 / hr);
            } else if (!have_left) {
                const ElementTables& tab = space.tables(eR);
                const int n = space.n_local(eR);
                const double hr = mesh.element_size(eR);
                for (int i = 0; i < n; ++i) {
                    const double phi_i = tab.phi_left[i];
                    const double dphi_i = tab.dphi_left[i] * 2.0 / hr;
                    for (int j = 0; j < n; ++j) {
                        const double phi_j = tab.phi_left[j];
                        const double dphi_j = tab.dphi_left[j] * 2.0 / hr;
                        trip.push_back({space.dof_start(eR) + i, space.dof_start(eR) + j,
                                        nu * dphi_j * phi_i + nu * dphi_i * phi_j +
                                            mu * phi_j * phi_i});
                    }
                }
            }
            // Neumann face: data only, no state dependence
        }

        if (burgers) {
            const Trace tl = have_left ? right_trace(space, u, eL) : Trace{};
            const Trace tr = have_right ? left_trace(space, u, eR) : Trace{};
            double d_ul = 0.0, d_ur = 0.0;
            if (have_left && have_right) {
                const LfFlux lf = lax_friedrichs(tl.value, tr.value);
                d_ul = lf.d_ul;
                d_ur = lf.d_ur;
            } else if (!have_left) {
                const LfFlux lf = lax_friedrichs(problem.dirichlet_left, tr.value);
                d_ur = lf.d_ur;
            } else {
                d_ul = tl.value;
            }
            auto scatter = [&](int elem, double sign, double d_trace, int trial_elem,
                               const std::vector<double>& trial_phi) {
                const ElementTables& tab = space.tables(elem);
                const int n = space.n_local(elem);
                const int tn = space.n_local(trial_elem);
                const std::vector<double>& test_phi =
                    sign > 0 ? tab.phi_right : tab.phi_left;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < tn; ++j)
                        trip.push_back({space.dof_start(elem) + i,
                                        space.dof_start(trial_elem) + j,
                                        sign * d_trace * trial_phi[j] * test_phi[i]});
            };
            if (have_left) {
                const ElementTables& tabL = space.tables(eL);
                if (d_ul != 0.0) scatter(eL, +1.0, d_ul, eL, tabL.phi_right);
                if (have_right && d_ur != 0.0)
                    scatter(eL, +1.0, d_ur, eR, space.tables(eR).phi_left);
            }
            if (have_right) {
                const ElementTables& tabR = space.tables(eR);
                if (d_ur != 0.0) scatter(eR, -1.0, d_ur, eR, tabR.phi_left);
                if (have_left && d_ul != 0.0)
                    scatter(eR, -1.0, d_ul, eL, space.tables(eL).phi_right);
            }
        }
    }
    return SparseMatrix(space.n_dofs(), space.n_dofs(), std::move(trip));
}

SparseMatrix mass_matrix(const DiscreteSpace& space) {
    std::vector<Triplet> trip;
    for (int e = 0; e < space.n_elements(); ++e) {
        const ElementTables& tab = space.tables(e);
        const int n = space.n_local(e);
        const int base = space.dof_start(e);
        const double h = space.mesh().element_size(e);
        for (int q = 0; q < tab.quad.size(); ++q) {
            const double w = 0.5 * h * tab.quad.weights[q];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    trip.push_back(
                        {base + i, base + j, w * tab.phi[q * n + i] * tab.phi[q * n + j]});
        }
    }
    return SparseMatrix(space.n_dofs(), space.n_dofs(), std::move(trip));
}

Vector load_vector(const DiscreteSpace& space, const PrimalProblem& problem, double t) {
    Vector zero(space.n_dofs(), 0.0);
    Vector r = assemble_residual(space, problem, zero, t);
    for (double& v : r) v = -v;
    return r;
}

double evaluate_output(const DiscreteSpace& space, const PrimalProblem& problem,
                       const OutputFunctional& output, const Vector& u, double t) {
    check_state(space, u, "evaluate_output");
    output_compatibility_check(problem, output);
    const Mesh1D& mesh = space.mesh();
    double j = 0.0;
    if (output.interior_weight) {
        for (int e = 0; e < space.n_elements(); ++e) {
            const ElementTables& tab = space.tables(e);
            const int n = space.n_local(e);
            const int base = space.dof_start(e);
            const double h = mesh.element_size(e);
            const double xl = mesh.element_left(e);
            for (int q = 0; q < tab.quad.size(); ++q) {
                const double w = 0.5 * h * tab.quad.weights[q];
                const double x = xl + 0.5 * h * (tab.quad.points[q] + 1.0);
                double uq = 0.0;
                for (int k = 0; k < n; ++k) uq += u[base + k] * tab.phi[q * n + k];
                j += w * output.interior_weight(x, t) * uq;
            }
        }
    }
    if (output.point_location)
        j += space.eval_at(u, *output.point_location);
    if (output.right_boundary_weight != 0.0 || output.quadratic_flux) {
        const Trace tr = right_trace(space, u, space.n_elements() - 1);
        j += output.right_boundary_weight * tr.value;
        if (output.quadratic_flux) j += 0.5 * tr.value * tr.value;
    }
    if (output.left_derivative_weight != 0.0) {
        // penalty-corrected derivative trace, compatible with the SIP flux
        const Trace tl = left_trace(space, u, 0);
        const double mu_over_nu = space.face_penalty(0);
        j += output.left_derivative_weight *
             (tl.deriv + mu_over_nu * (tl.value - problem.dirichlet_left));
    }
    return j;
}

Vector output_linearization(const DiscreteSpace& space, const PrimalProblem& problem,
                            const OutputFunctional& output, const Vector& u, double t) {
    check_state(space, u, "output_linearization");
    output_compatibility_check(problem, output);
    const Mesh1D& mesh = space.mesh();
    Vector g(space.n_dofs(), 0.0);
    if (output.interior_weight) {
        for (int e = 0; e < space.n_elements(); ++e) {
            const ElementTables& tab = space.tables(e);
            const int n = space.n_local(e);
            const int base = space.dof_start(e);
            const double h = mesh.element_size(e);
            const double xl = mesh.element_left(e);
            for (int q = 0; q < tab.quad.size(); ++q) {
                const double w = 0.5 * h * tab.quad.weights[q];
                const double x = xl + 0.5 * h * (tab.quad.points[q] + 1.0);
                const double gv = output.interior_weight(x, t);
                for (int i = 0; i < n; ++i) g[base + i] += w * gv * tab.phi[q * n + i];
            }
        }
    }
    if (output.point_location) {
        const int e = mesh.find_element(*output.point_location);
        const ElementTables& tab = space.tables(e);
        const int n = space.n_local(e);
        const double xi =
            2.0 * (*output.point_location - mesh.element_left(e)) / mesh.element_size(e) - 1.0;
        for (int i = 0; i < n; ++i)
            g[space.dof_start(e) + i] += lagrange_value(tab.nodes, i, xi);
    }
    if (output.right_boundary_weight != 0.0 || output.quadratic_flux) {
        const int e = space.n_elements() - 1;
        const ElementTables& tab = space.tables(e);
        const int n = space.n_local(e);
        double weight = output.right_boundary_weight;
        if (output.quadratic_flux) weight += right_trace(space, u, e).value;
        for (int i = 0; i < n; ++i)
            g[space.dof_start(e) + i] += weight * tab.phi_right[i];
    }
    if (output.left_derivative_weight != 0.0) {
        const ElementTables& tab = space.tables(0);
        const int n = space.n_local(0);
        const double dscale = 2.0 / mesh.element_size(0);
        const double mu_over_nu = space.face_penalty(0);
        for (int i = 0; i < n; ++i)
            g[space.dof_start(0) + i] += output.left_derivative_weight *
                                         (tab.dphi_left[i] * dscale + mu_over_nu * tab.phi_left[i]);
    }
    return g;
}

Vector solve_primal(const DiscreteSpace& space, const PrimalProblem& problem,
                    SolveReport* report) {
    problem.validate();
    if (is_unsteady(problem.kind))
        throw NotAvailable("solve_primal: unsteady problems use time_march");
    if (problem.kind != ProblemKind::SteadyBurgers) {
        Vector zero(space.n_dofs(), 0.0);
        const SparseMatrix a = assemble_jacobian(space, problem, zero);
        const Vector f = load_vector(space, problem);
        Vector u = solve(a, f);
        const double rnorm = inf_norm(assemble_residual(space, problem, u));
        if (report) {
            report->newton_iterations = 1;
            report->residual_norm = rnorm;
        }
        if (rnorm > 1e-10 * std::max(1.0, inf_norm(f)))
            throw SingularMatrix("solve_primal: residual tolerance not met");
        return u;
    }
    // Newton for Burgers, initial guess u = u_L everywhere
    Vector u(space.n_dofs(), problem.dirichlet_left);
    constexpr int kMaxNewton = 50;
    constexpr double kTol = 1e-12;
    for (int it = 0; it < kMaxNewton; ++it) {
        Vector r = assemble_residual(space, problem, u);
        const double rnorm = inf_norm(r);
        if (report) {
            report->newton_iterations = it;
            report->residual_norm = rnorm;
        }
        if (rnorm <= kTol) return u;
        for (double& v : r) v = -v;
        const SparseMatrix jac = assemble_jacobian(space, problem, u);
        const Vector du = solve(jac, r);
        axpy(1.0, du, u);
    }
    const double rnorm = inf_norm(assemble_residual(space, problem, u));
    if (rnorm <= kTol) {
        if (report) report->residual_norm = rnorm;
        return u;
    }
    throw NewtonDivergence("solve_primal: Newton tolerance unmet after 50 iterations (|R| = " +
                           std::to_string(rnorm) + ")");
}

} // namespace dwrlab

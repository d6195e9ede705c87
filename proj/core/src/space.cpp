#include "dwrlab/space.hpp"

#include <cmath>
#include <sstream>

#include "dwrlab/basis.hpp"
#include "dwrlab/io.hpp"

namespace dwrlab {

namespace {
constexpr double kSigma = 4.0; // SIP penalty scale
}

int default_quad_count(int order, ProblemKind kind) {
    if (kind == ProblemKind::SteadyBurgers) return 2 * order + 3;
    return order + 3;
}

DiscreteSpace::DiscreteSpace(Mesh1D mesh, ProblemKind kind)
    : mesh_(std::move(mesh)), kind_(kind) {
    const int ne = mesh_.n_elements();
    dof_offsets_.assign(ne + 1, 0);
    quad_counts_.assign(ne, 0);
    for (int e = 0; e < ne; ++e) {
        dof_offsets_[e + 1] = dof_offsets_[e] + mesh_.order(e) + 1;
        quad_counts_[e] = default_quad_count(mesh_.order(e), kind);
    }
    face_penalty_.assign(ne + 1, 0.0);
    for (int f = 0; f <= ne; ++f) {
        const int left = f - 1;
        const int right = f;
        int p = 0;
        double h = 0.0;
        if (left >= 0 && right < ne) {
            p = std::max(mesh_.order(left), mesh_.order(right));
            h = std::min(mesh_.element_size(left), mesh_.element_size(right));
        } else if (right < ne) {
            p = mesh_.order(right);
            h = mesh_.element_size(right);
        } else {
            p = mesh_.order(left);
            h = mesh_.element_size(left);
        }
        face_penalty_[f] = kSigma * (p + 1.0) * (p + 1.0) / h;
    }
    build_tables();
}

void DiscreteSpace::build_tables() {
    const int ne = mesh_.n_elements();
    tables_.resize(ne);
    for (int e = 0; e < ne; ++e) {
        ElementTables& t = tables_[e];
        const int n = mesh_.order(e) + 1;
        t.nodes = lobatto_points(n);
        t.quad = gauss_legendre(quad_counts_[e]);
        const int nq = t.quad.size();
        t.phi.resize(nq * n);
        t.dphi.resize(nq * n);
        for (int q = 0; q < nq; ++q) {
            for (int j = 0; j < n; ++j) {
                t.phi[q * n + j] = lagrange_value(t.nodes, j, t.quad.points[q]);
                t.dphi[q * n + j] = lagrange_derivative(t.nodes, j, t.quad.points[q]);
            }
        }
        t.phi_left.resize(n);
        t.phi_right.resize(n);
        t.dphi_left.resize(n);
        t.dphi_right.resize(n);
        for (int j = 0; j < n; ++j) {
            t.phi_left[j] = lagrange_value(t.nodes, j, -1.0);
            t.phi_right[j] = lagrange_value(t.nodes, j, 1.0);
            t.dphi_left[j] = lagrange_derivative(t.nodes, j, -1.0);
            t.dphi_right[j] = lagrange_derivative(t.nodes, j, 1.0);
        }
    }
}

double DiscreteSpace::eval(const Vector& u, int e, double x) const {
    const ElementTables& t = tables_[e];
    const double xi = 2.0 * (x - mesh_.element_left(e)) / mesh_.element_size(e) - 1.0;
    const int n = n_local(e);
    double v = 0.0;
    for (int j = 0; j < n; ++j)
        v += u[dof_start(e) + j] * lagrange_value(t.nodes, j, xi);
    return v;
}

double DiscreteSpace::eval_deriv(const Vector& u, int e, double x) const {
    const ElementTables& t = tables_[e];
    const double xi = 2.0 * (x - mesh_.element_left(e)) / mesh_.element_size(e) - 1.0;
    const int n = n_local(e);
    double v = 0.0;
    for (int j = 0; j < n; ++j)
        v += u[dof_start(e) + j] * lagrange_derivative(t.nodes, j, xi);
    return v * 2.0 / mesh_.element_size(e);
}

double DiscreteSpace::eval_at(const Vector& u, double x) const {
    return eval(u, mesh_.find_element(x), x);
}

Vector DiscreteSpace::project(const ScalarField& f, double t) const {
    Vector u(n_dofs(), 0.0);
    for (int e = 0; e < n_elements(); ++e) {
        const ElementTables& tab = tables_[e];
        const int n = n_local(e);
        const double h = mesh_.element_size(e);
        const double xl = mesh_.element_left(e);
        // local mass matrix and moment vector
        std::vector<double> m(n * n, 0.0), b(n, 0.0);
        for (int q = 0; q < tab.quad.size(); ++q) {
            const double w = 0.5 * h * tab.quad.weights[q];
            const double x = xl + 0.5 * h * (tab.quad.points[q] + 1.0);
            const double fv = f(x, t);
            for (int i = 0; i < n; ++i) {
                b[i] += w * fv * tab.phi[q * n + i];
                for (int j = 0; j < n; ++j)
                    m[i * n + j] += w * tab.phi[q * n + i] * tab.phi[q * n + j];
            }
        }
        // small dense solve (Gaussian elimination with partial pivoting)
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int k = 0; k < n; ++k) {
            int piv = k;
            for (int i = k + 1; i < n; ++i)
                if (std::abs(m[i * n + k]) > std::abs(m[piv * n + k])) piv = i;
            if (piv != k) {
                for (int j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
                std::swap(b[k], b[piv]);
            }
            for (int i = k + 1; i < n; ++i) {
                const double c = m[i * n + k] / m[k * n + k];
                for (int j = k; j < n; ++j) m[i * n + j] -= c * m[k * n + j];
                b[i] -= c * b[k];
            }
        }
        for (int k = n - 1; k >= 0; --k) {
            double s = b[k];
            for (int j = k + 1; j < n; ++j) s -= m[k * n + j] * u[dof_start(e) + j];
            u[dof_start(e) + k] = s / m[k * n + k];
        }
    }
    return u;
}

double DiscreteSpace::l2_error(const Vector& u, const std::function<double(double)>& ref) const {
    double err2 = 0.0;
    const QuadratureRule rule = gauss_legendre(14);
    for (int e = 0; e < n_elements(); ++e) {
        const double h = mesh_.element_size(e);
        const double xl = mesh_.element_left(e);
        for (int q = 0; q < rule.size(); ++q) {
            const double x = xl + 0.5 * h * (rule.points[q] + 1.0);
            const double d = eval(u, e, x) - ref(x);
            err2 += 0.5 * h * rule.weights[q] * d * d;
        }
    }
    return std::sqrt(err2);
}

DiscreteSpace enrich_space(const DiscreteSpace& coarse, int increment) {
    DiscreteSpace fine;
    fine.kind_ = coarse.kind_;
    fine.mesh_ = enrich_p(coarse.mesh_, std::vector<int>(coarse.n_elements(), increment));
    const int ne = fine.mesh_.n_elements();
    fine.dof_offsets_.assign(ne + 1, 0);
    for (int e = 0; e < ne; ++e)
        fine.dof_offsets_[e + 1] = fine.dof_offsets_[e] + fine.mesh_.order(e) + 1;
    fine.quad_counts_ = coarse.quad_counts_;  // inherited: nested-form consistency
    fine.face_penalty_ = coarse.face_penalty_;
    fine.build_tables();
    return fine;
}

DiscreteSpace refine_space_uniform(const DiscreteSpace& coarse) {
    DiscreteSpace fine;
    fine.kind_ = coarse.kind_;
    fine.mesh_ = refine_h(coarse.mesh_, std::vector<bool>(coarse.n_elements(), true));
    const int ne = fine.mesh_.n_elements();
    fine.dof_offsets_.assign(ne + 1, 0);
    fine.quad_counts_.assign(ne, 0);
    for (int e = 0; e < ne; ++e) {
        fine.dof_offsets_[e + 1] = fine.dof_offsets_[e] + fine.mesh_.order(e) + 1;
        fine.quad_counts_[e] = coarse.quad_counts_[e / 2];
    }
    fine.face_penalty_.assign(ne + 1, 0.0);
    for (int f = 0; f <= ne; ++f) {
        if (f % 2 == 0) {
            fine.face_penalty_[f] = coarse.face_penalty_[f / 2];
        } else {
            const int e = f; // right child of coarse element (f-1)/2 starts here
            const int p = fine.mesh_.order(e);
            const double h = fine.mesh_.element_size(e);
            fine.face_penalty_[f] = kSigma * (p + 1.0) * (p + 1.0) / h;
        }
    }
    fine.build_tables();
    return fine;
}

InjectionOperator space_injection(const DiscreteSpace& coarse, const DiscreteSpace& fine) {
    return build_injection(coarse.mesh(), fine.mesh());
}

std::string write_state(const Vector& u) {
    std::ostringstream os;
    os << "state v1 " << u.size() << "\n";
    for (double v : u) os << format_real(v) << "\n";
    return os.str();
}

Vector read_state(const std::string& text) {
    std::istringstream is(text);
    std::string tag, version;
    std::size_t n = 0;
    is >> tag >> version >> n;
    if (tag != "state" || version != "v1")
        throw ParseError("read_state: bad header", 1);
    Vector u(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (!(is >> u[i]))
            throw ParseError("read_state: truncated", static_cast<int>(i) + 2);
    return u;
}

} // namespace dwrlab

#include "dwrlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dwrlab/basis.hpp"
#include "dwrlab/io.hpp"
#include "dwrlab/quadrature.hpp"

namespace dwrlab {

Lineage Mesh1D::lineage_of(int e) const {
    auto it = ancestry_.find(ids_[e]);
    return it == ancestry_.end() ? Lineage{} : it->second;
}

int Mesh1D::find_element(double x) const {
    // half-open (x_l, x_r]: boundary points belong to the element on their left
    auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), x);
    int e = static_cast<int>(it - boundaries_.begin()) - 1;
    if (it != boundaries_.end() && *it == x) e = static_cast<int>(it - boundaries_.begin()) - 1;
    return std::clamp(e, 0, n_elements() - 1);
}

Mesh1D uniform_mesh(double x_left, double x_right, int n_elem, int order) {
    if (!(x_left < x_right))
        throw InvalidBounds("uniform_mesh: requires x_left < x_right");
    if (n_elem < 1)
        throw InvalidBounds("uniform_mesh: requires n_elem >= 1");
    if (order < 0 || order > kMaxOrder)
        throw OrderOutOfRange("uniform_mesh: order outside [0, 10]");
    Mesh1D m;
    m.boundaries_.resize(n_elem + 1);
    for (int i = 0; i <= n_elem; ++i)
        m.boundaries_[i] = x_left + (x_right - x_left) * i / n_elem;
    m.boundaries_.front() = x_left;
    m.boundaries_.back() = x_right;
    m.orders_.assign(n_elem, order);
    m.ids_.resize(n_elem);
    for (int e = 0; e < n_elem; ++e) m.ids_[e] = e;
    m.next_id_ = n_elem;
    return m;
}

Mesh1D refine_h(const Mesh1D& mesh, const std::vector<bool>& marks) {
    if (static_cast<int>(marks.size()) != mesh.n_elements())
        throw DimensionMismatch("refine_h: marks length != element count");
    Mesh1D out;
    out.ancestry_ = mesh.ancestry_;
    out.next_id_ = mesh.next_id_;
    out.boundaries_.push_back(mesh.x_left());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (marks[e]) {
            const double mid = 0.5 * (mesh.element_left(e) + mesh.element_right(e));
            const int parent = mesh.ids_[e];
            for (int half = 0; half < 2; ++half) {
                const int id = out.next_id_++;
                out.ancestry_[id] = Lineage{parent, half};
                out.ids_.push_back(id);
                out.orders_.push_back(mesh.order(e));
            }
            out.boundaries_.push_back(mid);
            out.boundaries_.push_back(mesh.element_right(e));
        } else {
            out.ids_.push_back(mesh.ids_[e]);
            out.orders_.push_back(mesh.order(e));
            out.boundaries_.push_back(mesh.element_right(e));
        }
    }
    return out;
}

Mesh1D coarsen_h(const Mesh1D& mesh, const std::vector<bool>& marks) {
    if (static_cast<int>(marks.size()) != mesh.n_elements())
        throw DimensionMismatch("coarsen_h: marks length != element count");
    Mesh1D out;
    out.ancestry_ = mesh.ancestry_;
    out.next_id_ = mesh.next_id_;
    out.boundaries_.push_back(mesh.x_left());
    int e = 0;
    while (e < mesh.n_elements()) {
        bool merged = false;
        if (e + 1 < mesh.n_elements() && marks[e] && marks[e + 1]) {
            const Lineage a = mesh.lineage_of(e);
            const Lineage b = mesh.lineage_of(e + 1);
            if (a.parent >= 0 && a.parent == b.parent && a.sibling == 0 && b.sibling == 1) {
                out.ids_.push_back(a.parent);
                out.orders_.push_back(std::max(mesh.order(e), mesh.order(e + 1)));
                out.boundaries_.push_back(mesh.element_right(e + 1));
                e += 2;
                merged = true;
            }
        }
        if (!merged) {
            out.ids_.push_back(mesh.ids_[e]);
            out.orders_.push_back(mesh.order(e));
            out.boundaries_.push_back(mesh.element_right(e));
            ++e;
        }
    }
    return out;
}

Mesh1D enrich_p(const Mesh1D& mesh, const std::vector<int>& increments) {
    if (static_cast<int>(increments.size()) != mesh.n_elements())
        throw DimensionMismatch("enrich_p: increments length != element count");
    Mesh1D out = mesh;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const int p = mesh.order(e) + increments[e];
        if (p < 0 || p > kMaxOrder)
            throw OrderOutOfRange("enrich_p: resulting order outside [0, 10]");
        out.orders_[e] = p;
    }
    return out;
}

std::string write_mesh(const Mesh1D& mesh) {
    std::ostringstream os;
    os << "mesh1d v1 " << mesh.n_elements() << "\n";
    for (int e = 0; e < mesh.n_elements(); ++e)
        os << format_real(mesh.element_left(e)) << " " << format_real(mesh.element_right(e))
           << " " << mesh.order(e) << "\n";
    return os.str();
}

Mesh1D read_mesh(const std::string& text) {
    std::istringstream is(text);
    std::string tag, version;
    int n = 0;
    is >> tag >> version >> n;
    if (tag != "mesh1d" || version != "v1" || n < 1)
        throw ParseError("read_mesh: bad header", 1);
    Mesh1D m;
    m.boundaries_.reserve(n + 1);
    m.orders_.reserve(n);
    double prev_right = 0.0;
    for (int e = 0; e < n; ++e) {
        double xl = 0.0, xr = 0.0;
        int p = 0;
        if (!(is >> xl >> xr >> p))
            throw ParseError("read_mesh: truncated element line", e + 2);
        if (e == 0)
            m.boundaries_.push_back(xl);
        else if (xl != prev_right)
            throw ParseError("read_mesh: elements not contiguous", e + 2);
        if (!(xl < xr))
            throw ParseError("read_mesh: element bounds not increasing", e + 2);
        if (p < 0 || p > kMaxOrder)
            throw ParseError("read_mesh: order outside [0, 10]", e + 2);
        m.boundaries_.push_back(xr);
        m.orders_.push_back(p);
        prev_right = xr;
    }
    m.ids_.resize(n);
    for (int e = 0; e < n; ++e) m.ids_[e] = e;
    m.next_id_ = n;
    return m;
}

namespace {

bool close(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<int> dof_offsets(const Mesh1D& mesh) {
    std::vector<int> off(mesh.n_elements() + 1, 0);
    for (int e = 0; e < mesh.n_elements(); ++e)
        off[e + 1] = off[e] + mesh.order(e) + 1;
    return off;
}

} // namespace

InjectionOperator build_injection(const Mesh1D& coarse, const Mesh1D& fine) {
    if (!close(coarse.x_left(), fine.x_left()) || !close(coarse.x_right(), fine.x_right()))
        throw NotNested("build_injection: domains differ");

    // Every coarse boundary must appear among the fine boundaries.
    {
        std::size_t j = 0;
        for (double xb : coarse.boundaries()) {
            while (j < fine.boundaries().size() && fine.boundaries()[j] < xb &&
                   !close(fine.boundaries()[j], xb))
                ++j;
            if (j >= fine.boundaries().size() || !close(fine.boundaries()[j], xb))
                throw NotNested("build_injection: coarse boundary missing from fine mesh");
        }
    }

    InjectionOperator op;
    op.fine_to_coarse.resize(fine.n_elements());
    const std::vector<int> coarse_off = dof_offsets(coarse);
    const std::vector<int> fine_off = dof_offsets(fine);

    std::vector<Triplet> triplets;
    int c = 0;
    for (int e = 0; e < fine.n_elements(); ++e) {
        const double mid = 0.5 * (fine.element_left(e) + fine.element_right(e));
        while (c + 1 < coarse.n_elements() && coarse.element_right(c) < mid) ++c;
        if (!(coarse.element_left(c) <= mid && mid <= coarse.element_right(c)))
            throw NotNested("build_injection: fine element not inside a coarse element");
        if (fine.order(e) < coarse.order(c))
            throw NotNested("build_injection: fine order below coarse order");
        op.fine_to_coarse[e] = c;

        const auto fine_nodes = lobatto_points(fine.order(e) + 1);
        const auto coarse_nodes = lobatto_points(coarse.order(c) + 1);
        const double cl = coarse.element_left(c);
        const double ch = coarse.element_size(c);
        for (int i = 0; i <= fine.order(e); ++i) {
            // physical position of the fine node, then coarse reference coord
            const double x = fine.element_left(e) +
                             0.5 * fine.element_size(e) * (fine_nodes[i] + 1.0);
            const double xi = 2.0 * (x - cl) / ch - 1.0;
            for (int j = 0; j <= coarse.order(c); ++j) {
                const double v = lagrange_value(coarse_nodes, j, xi);
                if (v != 0.0)
                    triplets.push_back({fine_off[e] + i, coarse_off[c] + j, v});
            }
        }
    }
    op.matrix = SparseMatrix(fine_off.back(), coarse_off.back(), std::move(triplets));
    return op;
}

} // namespace dwrlab

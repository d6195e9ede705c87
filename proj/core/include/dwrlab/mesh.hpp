#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dwrlab/errors.hpp"
#include "dwrlab/linalg.hpp"

namespace dwrlab {

constexpr int kMaxOrder = 10;

/// Refinement lineage of an element: the id of the element it was bisected
/// from and which half it is. Ids are unique within a mesh family.
struct Lineage {
    int parent = -1;
    int sibling = -1; // 0 = left child, 1 = right child
};

/// Ordered 1D element partition with per-element polynomial order and
/// parent/child refinement history. Immutable value type: all operations
/// return new meshes.
class Mesh1D {
public:
    Mesh1D() = default;

    double x_left() const { return boundaries_.front(); }
    double x_right() const { return boundaries_.back(); }
    int n_elements() const { return static_cast<int>(orders_.size()); }

    const std::vector<double>& boundaries() const { return boundaries_; }
    const std::vector<int>& orders() const { return orders_; }

    double element_left(int e) const { return boundaries_[e]; }
    double element_right(int e) const { return boundaries_[e + 1]; }
    double element_size(int e) const { return boundaries_[e + 1] - boundaries_[e]; }
    int order(int e) const { return orders_[e]; }

    int element_id(int e) const { return ids_[e]; }
    Lineage lineage_of(int e) const;

    /// Index of the element whose half-open interval (x_l, x_r] contains x;
    /// points at or left of the domain start map to element 0.
    int find_element(double x) const;

    friend Mesh1D uniform_mesh(double x_left, double x_right, int n_elem, int order);
    friend Mesh1D refine_h(const Mesh1D& mesh, const std::vector<bool>& marks);
    friend Mesh1D coarsen_h(const Mesh1D& mesh, const std::vector<bool>& marks);
    friend Mesh1D enrich_p(const Mesh1D& mesh, const std::vector<int>& increments);
    friend Mesh1D read_mesh(const std::string& text);

private:
    std::vector<double> boundaries_; // n_elements + 1, strictly increasing
    std::vector<int> orders_;        // n_elements
    std::vector<int> ids_;           // n_elements, unique within family
    std::unordered_map<int, Lineage> ancestry_; // id -> lineage, whole family
    int next_id_ = 0;
};

Mesh1D uniform_mesh(double x_left, double x_right, int n_elem, int order);

/// Bisects every marked element at its midpoint. Children inherit the
/// parent's order and record their lineage.
Mesh1D refine_h(const Mesh1D& mesh, const std::vector<bool>& marks);

/// Merges sibling pairs back into their parent when both are marked;
/// the merged element gets the max of the children's orders. Marks that
/// do not cover a full sibling pair are ignored.
Mesh1D coarsen_h(const Mesh1D& mesh, const std::vector<bool>& marks);

/// Adds the per-element increments to the orders; geometry unchanged.
Mesh1D enrich_p(const Mesh1D& mesh, const std::vector<int>& increments);

/// Plain-text serialization:
///   mesh1d v1 <n_elem>
///   <x_left> <x_right> <p>   (one line per element, 17 significant digits)
std::string write_mesh(const Mesh1D& mesh);
Mesh1D read_mesh(const std::string& text);

/// Lossless coarse-to-fine embedding between nested discrete spaces.
/// The matrix maps coarse DOF vectors to fine DOF vectors representing the
/// same broken-polynomial function (element-major nodal Lagrange layout on
/// Gauss-Lobatto points, as used by DiscreteSpace).
struct InjectionOperator {
    SparseMatrix matrix;
    /// fine element -> containing coarse element
    std::vector<int> fine_to_coarse;

    Vector apply(const Vector& coarse) const { return matrix.matvec(coarse); }
};

/// Requires fine to be reachable from coarse by refine_h and/or enrich_p.
InjectionOperator build_injection(const Mesh1D& coarse, const Mesh1D& fine);

} // namespace dwrlab

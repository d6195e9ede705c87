#pragma once

#include <functional>
#include <vector>

#include "dwrlab/mesh.hpp"
#include "dwrlab/problems.hpp"
#include "dwrlab/quadrature.hpp"

namespace dwrlab {

/// Per-element reference tables: Lobatto nodes, quadrature, and basis
/// values/derivatives at the quadrature points and endpoints.
struct ElementTables {
    std::vector<double> nodes;       // reference Lobatto nodes, size p+1
    QuadratureRule quad;             // reference rule
    std::vector<double> phi;         // [q * (p+1) + j]
    std::vector<double> dphi;        // reference derivative
    std::vector<double> phi_left;    // at xi = -1
    std::vector<double> phi_right;   // at xi = +1
    std::vector<double> dphi_left;
    std::vector<double> dphi_right;
};

/// Broken nodal Lagrange space on Gauss-Lobatto points, element-major DOF
/// layout. Quadrature counts and face penalties are part of the space so a
/// fine space can inherit them from its coarse parent, keeping the coarse
/// problem an exact Galerkin restriction of the fine one.
class DiscreteSpace {
public:
    DiscreteSpace() = default;
    DiscreteSpace(Mesh1D mesh, ProblemKind kind);

    const Mesh1D& mesh() const { return mesh_; }
    ProblemKind kind() const { return kind_; }
    int n_elements() const { return mesh_.n_elements(); }
    int n_dofs() const { return dof_offsets_.back(); }
    int dof_start(int e) const { return dof_offsets_[e]; }
    int n_local(int e) const { return dof_offsets_[e + 1] - dof_offsets_[e]; }
    int order(int e) const { return mesh_.order(e); }

    const ElementTables& tables(int e) const { return tables_[e]; }
    int quad_count(int e) const { return quad_counts_[e]; }
    /// Geometric penalty sigma (p+1)^2 / h at face f (0..n_elements);
    /// multiplied by nu during assembly.
    double face_penalty(int f) const { return face_penalty_[f]; }

    /// Value of the broken function at physical x inside element e.
    double eval(const Vector& u, int e, double x) const;
    double eval_deriv(const Vector& u, int e, double x) const;
    /// Trace from the element whose interval (x_l, x_r] contains x.
    double eval_at(const Vector& u, double x) const;

    /// L2 projection of a function onto the space.
    Vector project(const ScalarField& f, double t = 0.0) const;

    /// Exact L2 error of a broken function against a smooth reference.
    double l2_error(const Vector& u, const std::function<double(double)>& ref) const;

    friend DiscreteSpace enrich_space(const DiscreteSpace& coarse, int increment);
    friend DiscreteSpace refine_space_uniform(const DiscreteSpace& coarse);

private:
    void build_tables();

    Mesh1D mesh_;
    ProblemKind kind_ = ProblemKind::SteadyAdvection;
    std::vector<int> dof_offsets_;
    std::vector<int> quad_counts_;
    std::vector<double> face_penalty_;
    std::vector<ElementTables> tables_;
};

/// Default quadrature count: exact for every polynomial term of the variant
/// on this space and on its order-enriched fine space.
int default_quad_count(int order, ProblemKind kind);

/// Order-enriched fine space; inherits quadrature and penalties.
DiscreteSpace enrich_space(const DiscreteSpace& coarse, int increment = 1);
/// Uniformly bisected fine space; children inherit quadrature, existing
/// faces keep their penalty, new midpoint faces get fresh penalties.
DiscreteSpace refine_space_uniform(const DiscreteSpace& coarse);

/// Injection between the spaces' meshes (nodal sampling of the coarse
/// function on the fine space).
InjectionOperator space_injection(const DiscreteSpace& coarse, const DiscreteSpace& fine);

/// State serialization: "state v1 <N>" then one coefficient per line.
std::string write_state(const Vector& u);
Vector read_state(const std::string& text);

} // namespace dwrlab

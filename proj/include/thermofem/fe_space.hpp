#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "thermofem/linalg.hpp"
#include "thermofem/mesh.hpp"
#include "thermofem/quadrature.hpp"

namespace thermofem {

using Vec2 = std::array<double, 2>;

/// Lagrange element of degree 1..3 on the reference triangle with vertices
/// (0,0), (1,0), (0,1). Local nodes are ordered vertices, then edges
/// (0-1, 1-2, 2-0, each walked from its first to its second vertex), then
/// interior points.
class LagrangeElement {
public:
    explicit LagrangeElement(int degree);

    int degree() const noexcept { return degree_; }
    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    /// Barycentric lattice coordinates (l0, l1, l2), summing to degree.
    const std::vector<std::array<int, 3>>& lattice() const noexcept { return lattice_; }
    const std::vector<std::array<double, 2>>& nodes() const noexcept { return nodes_; }

    void values(double xi, double eta, std::span<double> out) const;
    void gradients(double xi, double eta, std::span<Vec2> out) const;

private:
    int degree_;
    std::vector<std::array<int, 3>> lattice_;
    std::vector<std::array<double, 2>> nodes_;
    std::vector<std::array<int, 2>> monomials_;
    std::vector<double> coeffs_;  // basis i = sum_m coeffs_[m * n + i] * monomial_m
};

/// Basis values and reference gradients tabulated at the points of a rule.
struct Tabulation {
    std::size_t num_points = 0;
    std::size_t num_basis = 0;
    std::vector<double> values;       // [q * num_basis + i]
    std::vector<Vec2> ref_gradients;  // [q * num_basis + i]
};

Tabulation tabulate(const LagrangeElement& element, const QuadratureRule& rule);

/// Continuous Lagrange space of degree 1..3 on a mesh.
///
/// Global numbering: mesh vertices first (dof == vertex index), then edge dofs
/// for edges sorted by (min vertex, max vertex) and walked from the smaller
/// vertex, then cell-interior dofs by cell index.
class FESpace {
public:
    FESpace(MeshPtr mesh, int degree);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    int degree() const noexcept { return element_.degree(); }
    const LagrangeElement& element() const noexcept { return element_; }

    std::size_t num_dofs() const noexcept { return coords_.size(); }
    std::size_t dofs_per_cell() const noexcept { return element_.num_nodes(); }
    std::size_t num_cells() const noexcept { return mesh_->num_triangles(); }
    std::span<const std::size_t> cell_dofs(std::size_t cell) const {
        return {cell_dofs_.data() + cell * dofs_per_cell(), dofs_per_cell()};
    }
    const std::vector<Point>& dof_coordinates() const noexcept { return coords_; }
    const std::vector<std::size_t>& boundary_dofs() const noexcept { return boundary_; }
    const std::vector<std::size_t>& interior_dofs() const noexcept { return interior_; }
    bool is_boundary_dof(std::size_t d) const { return on_boundary_[d]; }

    /// Sparsity of all bilinear forms on this space.
    const std::shared_ptr<const CsrStructure>& structure() const noexcept { return structure_; }
    /// Positions of the local (i, j) couplings of a cell in the CSR value array.
    std::span<const std::size_t> cell_entries(std::size_t cell) const {
        const std::size_t n = dofs_per_cell();
        return {cell_entries_.data() + cell * n * n, n * n};
    }

private:
    MeshPtr mesh_;
    LagrangeElement element_;
    std::vector<Point> coords_;
    std::vector<std::size_t> cell_dofs_;
    std::vector<std::size_t> boundary_;
    std::vector<std::size_t> interior_;
    std::vector<bool> on_boundary_;
    std::shared_ptr<const CsrStructure> structure_;
    std::vector<std::size_t> cell_entries_;
};

using SpacePtr = std::shared_ptr<const FESpace>;

SpacePtr build_space(MeshPtr mesh, int degree);

/// Coefficient vector on a space.
struct FEFunction {
    SpacePtr space;
    Vector coefficients;

    FEFunction() = default;
    explicit FEFunction(SpacePtr s) : space(std::move(s)), coefficients(space->num_dofs(), 0.0) {}
    FEFunction(SpacePtr s, Vector c);

    /// True when all boundary coefficients are exactly zero.
    bool dirichlet_conforming() const;
};

/// Analytic field f(x, t) with an optional gradient.
struct ScalarField {
    std::function<double(const Point&, double)> value;
    std::function<Vec2(const Point&, double)> gradient;

    double operator()(const Point& p, double t = 0.0) const { return value(p, t); }
    bool has_gradient() const noexcept { return static_cast<bool>(gradient); }

    static ScalarField constant(double c);
};

/// Per-cell geometry and physical basis data at the points of a rule.
class CellValues {
public:
    CellValues(const FESpace& space, const QuadratureRule& rule);

    void reinit(std::size_t cell);

    std::size_t cell() const noexcept { return cell_; }
    std::size_t num_points() const noexcept { return rule_.size(); }
    std::size_t num_basis() const noexcept { return tab_.num_basis; }
    double area() const noexcept { return area_; }
    double JxW(std::size_t q) const noexcept { return area_ * rule_.weights[q]; }
    const Point& point(std::size_t q) const noexcept { return points_[q]; }
    double shape(std::size_t i, std::size_t q) const noexcept {
        return tab_.values[q * tab_.num_basis + i];
    }
    const Vec2& shape_grad(std::size_t i, std::size_t q) const noexcept {
        return grads_[q * tab_.num_basis + i];
    }
    std::span<const std::size_t> dofs() const { return space_.cell_dofs(cell_); }

    double value(std::span<const double> coeffs, std::size_t q) const;
    Vec2 gradient(std::span<const double> coeffs, std::size_t q) const;

    const FESpace& space() const noexcept { return space_; }

private:
    const FESpace& space_;
    QuadratureRule rule_;
    Tabulation tab_;
    std::size_t cell_ = 0;
    double area_ = 0.0;
    std::vector<Point> points_;
    std::vector<Vec2> grads_;
};

}  // namespace thermofem

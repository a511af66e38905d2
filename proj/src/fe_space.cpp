#include "thermofem/fe_space.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "thermofem/errors.hpp"

namespace thermofem {

namespace {

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

}  // namespace

LagrangeElement::LagrangeElement(int degree) : degree_(degree) {
    if (degree < 1 || degree > 3)
        throw InvalidParameter("Lagrange element degree must be 1, 2 or 3 (got " +
                               std::to_string(degree) + ")");
    const int p = degree;
    lattice_.push_back({p, 0, 0});
    lattice_.push_back({0, p, 0});
    lattice_.push_back({0, 0, p});
    for (int k = 1; k < p; ++k) lattice_.push_back({p - k, k, 0});  // edge 0-1
    for (int k = 1; k < p; ++k) lattice_.push_back({0, p - k, k});  // edge 1-2
    for (int k = 1; k < p; ++k) lattice_.push_back({k, 0, p - k});  // edge 2-0
    for (int l1 = 1; l1 < p; ++l1)
        for (int l2 = 1; l1 + l2 < p; ++l2) lattice_.push_back({p - l1 - l2, l1, l2});
    for (const auto& l : lattice_)
        nodes_.push_back({static_cast<double>(l[1]) / p, static_cast<double>(l[2]) / p});

    for (int total = 0; total <= p; ++total)
        for (int b = 0; b <= total; ++b) monomials_.push_back({total - b, b});

    // Invert the Vandermonde matrix column by column.
    const std::size_t n = nodes_.size();
    std::vector<Vector> vander(n, Vector(n));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t m = 0; m < n; ++m)
            vander[k][m] = ipow(nodes_[k][0], monomials_[m][0]) * ipow(nodes_[k][1], monomials_[m][1]);
    coeffs_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Vector e(n, 0.0);
        e[i] = 1.0;
        const Vector c = dense_lu_solve(vander, e);
        for (std::size_t m = 0; m < n; ++m) coeffs_[m * n + i] = c[m];
    }
}

void LagrangeElement::values(double xi, double eta, std::span<double> out) const {
    const std::size_t n = num_nodes();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        const double mono = ipow(xi, monomials_[m][0]) * ipow(eta, monomials_[m][1]);
        for (std::size_t i = 0; i < n; ++i) out[i] += coeffs_[m * n + i] * mono;
    }
}

void LagrangeElement::gradients(double xi, double eta, std::span<Vec2> out) const {
    const std::size_t n = num_nodes();
    std::fill(out.begin(), out.end(), Vec2{0.0, 0.0});
    for (std::size_t m = 0; m < n; ++m) {
        const int a = monomials_[m][0];
        const int b = monomials_[m][1];
        const double dx = a > 0 ? a * ipow(xi, a - 1) * ipow(eta, b) : 0.0;
        const double dy = b > 0 ? b * ipow(xi, a) * ipow(eta, b - 1) : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            out[i][0] += coeffs_[m * n + i] * dx;
            out[i][1] += coeffs_[m * n + i] * dy;
        }
    }
}

Tabulation tabulate(const LagrangeElement& element, const QuadratureRule& rule) {
    Tabulation t;
    t.num_points = rule.size();
    t.num_basis = element.num_nodes();
    t.values.resize(t.num_points * t.num_basis);
    t.ref_gradients.resize(t.num_points * t.num_basis);
    for (std::size_t q = 0; q < t.num_points; ++q) {
        const auto& xq = rule.points[q];
        element.values(xq[0], xq[1], {t.values.data() + q * t.num_basis, t.num_basis});
        element.gradients(xq[0], xq[1], {t.ref_gradients.data() + q * t.num_basis, t.num_basis});
    }
    return t;
}

FESpace::FESpace(MeshPtr mesh, int degree) : mesh_(std::move(mesh)), element_(degree) {
    if (!mesh_) throw InvalidParameter("FESpace: null mesh");
    const Mesh& m = *mesh_;
    const int p = degree;
    const std::size_t nv = m.num_vertices();
    const std::size_t nc = m.num_triangles();
    const std::size_t nloc = element_.num_nodes();
    const std::size_t per_edge = static_cast<std::size_t>(p - 1);
    const std::size_t per_cell_interior = nloc - 3 - 3 * per_edge;

    // Unique edges with incidence counts.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(3 * nc);
    for (const auto& tri : m.triangles())
        for (int k = 0; k < 3; ++k) {
            const auto a = tri[k];
            const auto b = tri[(k + 1) % 3];
            edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    std::sort(edges.begin(), edges.end());
    std::vector<std::pair<std::size_t, std::size_t>> unique_edges;
    std::vector<bool> boundary_edge;
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) ++j;
        unique_edges.push_back(edges[i]);
        boundary_edge.push_back(j - i == 1);
        i = j;
    }
    const auto edge_index = [&](std::size_t a, std::size_t b) {
        const std::pair<std::size_t, std::size_t> key{std::min(a, b), std::max(a, b)};
        return static_cast<std::size_t>(
            std::lower_bound(unique_edges.begin(), unique_edges.end(), key) - unique_edges.begin());
    };

    const std::size_t n_edge_dofs = unique_edges.size() * per_edge;
    const std::size_t ndofs = nv + n_edge_dofs + nc * per_cell_interior;
    coords_.resize(ndofs);
    on_boundary_.assign(ndofs, false);
    for (std::size_t v = 0; v < nv; ++v) {
        coords_[v] = m.vertices()[v];
        on_boundary_[v] = m.is_boundary_vertex(v);
    }

    cell_dofs_.resize(nc * nloc);
    const auto& lattice = element_.lattice();
    for (std::size_t c = 0; c < nc; ++c) {
        const auto& tri = m.triangles()[c];
        const Point& p0 = m.vertices()[tri[0]];
        const Point& p1 = m.vertices()[tri[1]];
        const Point& p2 = m.vertices()[tri[2]];
        std::size_t* dofs = cell_dofs_.data() + c * nloc;
        std::size_t local = 0;
        for (int k = 0; k < 3; ++k) dofs[local++] = tri[k];
        const int edge_ends[3][2] = {{0, 1}, {1, 2}, {2, 0}};
        for (const auto& ends : edge_ends) {
            const std::size_t va = tri[ends[0]];
            const std::size_t vb = tri[ends[1]];
            const std::size_t e = edge_index(va, vb);
            for (std::size_t k = 1; k <= per_edge; ++k) {
                const std::size_t pos = va < vb ? k : per_edge + 1 - k;
                const std::size_t d = nv + e * per_edge + (pos - 1);
                dofs[local] = d;
                on_boundary_[d] = boundary_edge[e];
                ++local;
            }
        }
        for (std::size_t k = 0; k < per_cell_interior; ++k)
            dofs[local++] = nv + n_edge_dofs + c * per_cell_interior + k;
        for (std::size_t i = 3; i < nloc; ++i) {
            const auto& l = lattice[i];
            const double w0 = static_cast<double>(l[0]) / p;
            const double w1 = static_cast<double>(l[1]) / p;
            const double w2 = static_cast<double>(l[2]) / p;
            coords_[dofs[i]] = {w0 * p0.x + w1 * p1.x + w2 * p2.x, w0 * p0.y + w1 * p1.y + w2 * p2.y};
        }
    }
    for (std::size_t d = 0; d < ndofs; ++d) (on_boundary_[d] ? boundary_ : interior_).push_back(d);

    // Sparsity pattern from cell couplings.
    std::vector<std::vector<std::size_t>> row_cols(ndofs);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto dofs = cell_dofs(c);
        for (auto i : dofs) row_cols[i].insert(row_cols[i].end(), dofs.begin(), dofs.end());
    }
    auto s = std::make_shared<CsrStructure>();
    s->rows = s->cols = ndofs;
    s->row_offsets.assign(ndofs + 1, 0);
    for (std::size_t i = 0; i < ndofs; ++i) {
        auto& cols = row_cols[i];
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        s->col_indices.insert(s->col_indices.end(), cols.begin(), cols.end());
        s->row_offsets[i + 1] = s->col_indices.size();
        std::vector<std::size_t>().swap(cols);
    }
    structure_ = std::move(s);
    cell_entries_.resize(nc * nloc * nloc);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto dofs = cell_dofs(c);
        for (std::size_t i = 0; i < nloc; ++i)
            for (std::size_t j = 0; j < nloc; ++j)
                cell_entries_[(c * nloc + i) * nloc + j] = structure_->find(dofs[i], dofs[j]);
    }
}

SpacePtr build_space(MeshPtr mesh, int degree) {
    return std::make_shared<const FESpace>(std::move(mesh), degree);
}

FEFunction::FEFunction(SpacePtr s, Vector c) : space(std::move(s)), coefficients(std::move(c)) {
    if (!space || coefficients.size() != space->num_dofs())
        throw InvalidParameter("FEFunction: coefficient count does not match the space");
}

bool FEFunction::dirichlet_conforming() const {
    for (auto d : space->boundary_dofs())
        if (coefficients[d] != 0.0) return false;
    return true;
}

ScalarField ScalarField::constant(double c) {
    return {[c](const Point&, double) { return c; },
            [](const Point&, double) { return Vec2{0.0, 0.0}; }};
}

CellValues::CellValues(const FESpace& space, const QuadratureRule& rule)
    : space_(space), rule_(rule), tab_(tabulate(space.element(), rule)) {
    points_.resize(rule_.size());
    grads_.resize(tab_.ref_gradients.size());
}

void CellValues::reinit(std::size_t cell) {
    cell_ = cell;
    const Mesh& m = space_.mesh();
    const auto& tri = m.triangles()[cell];
    const Point& p0 = m.vertices()[tri[0]];
    const Point& p1 = m.vertices()[tri[1]];
    const Point& p2 = m.vertices()[tri[2]];
    const double a = p1.x - p0.x, b = p2.x - p0.x;
    const double c = p1.y - p0.y, d = p2.y - p0.y;
    const double det = a * d - b * c;
    area_ = 0.5 * det;
    for (std::size_t q = 0; q < rule_.size(); ++q) {
        const auto& r = rule_.points[q];
        points_[q] = {p0.x + a * r[0] + b * r[1], p0.y + c * r[0] + d * r[1]};
    }
    const double inv = 1.0 / det;
    for (std::size_t k = 0; k < grads_.size(); ++k) {
        const auto& g = tab_.ref_gradients[k];
        grads_[k] = {(d * g[0] - c * g[1]) * inv, (-b * g[0] + a * g[1]) * inv};
    }
}

double CellValues::value(std::span<const double> coeffs, std::size_t q) const {
    const auto dofs = this->dofs();
    double s = 0.0;
    for (std::size_t i = 0; i < dofs.size(); ++i) s += coeffs[dofs[i]] * shape(i, q);
    return s;
}

Vec2 CellValues::gradient(std::span<const double> coeffs, std::size_t q) const {
    const auto dofs = this->dofs();
    Vec2 g{0.0, 0.0};
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        const auto& sg = shape_grad(i, q);
        g[0] += coeffs[dofs[i]] * sg[0];
        g[1] += coeffs[dofs[i]] * sg[1];
    }
    return g;
}

}  // namespace thermofem

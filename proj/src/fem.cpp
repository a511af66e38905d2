#include "thermofem/fem.hpp"

#include <cmath>
#include <vector>

#include "thermofem/errors.hpp"

namespace thermofem {

int assembly_quadrature_degree(const FESpace& space) { return 2 * space.degree() + 2; }
int error_quadrature_degree(const FESpace& space) { return 2 * space.degree() + 4; }

namespace {

int resolve_degree(const FESpace& space, int quad_degree) {
    return quad_degree >= 0 ? quad_degree : assembly_quadrature_degree(space);
}

template <typename LocalKernel>
SparseMatrix assemble_matrix(const FESpace& space, int quad_degree, LocalKernel&& kernel) {
    const auto rule = triangle_rule(resolve_degree(space, quad_degree));
    CellValues cv(space, rule);
    SparseMatrix a(space.structure());
    auto values = a.values();
    const std::size_t n = space.dofs_per_cell();
    std::vector<double> local(n * n);
    for (std::size_t c = 0; c < space.num_cells(); ++c) {
        cv.reinit(c);
        std::fill(local.begin(), local.end(), 0.0);
        kernel(cv, local);
        const auto entries = space.cell_entries(c);
        for (std::size_t k = 0; k < n * n; ++k) values[entries[k]] += local[k];
    }
    return a;
}

}  // namespace

SparseMatrix assemble_mass(const FESpace& space, const QpScalar& weight, int quad_degree) {
    const std::size_t n = space.dofs_per_cell();
    return assemble_matrix(space, quad_degree, [&](const CellValues& cv, std::vector<double>& local) {
        for (std::size_t q = 0; q < cv.num_points(); ++q) {
            const double w = cv.JxW(q) * (weight ? weight(cv, q) : 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double wi = w * cv.shape(i, q);
                for (std::size_t j = 0; j < n; ++j) local[i * n + j] += wi * cv.shape(j, q);
            }
        }
    });
}

SparseMatrix assemble_mass(const FESpace& space, const ScalarField& weight, double t) {
    return assemble_mass(space, [&](const CellValues& cv, std::size_t q) {
        return weight(cv.point(q), t);
    });
}

SparseMatrix assemble_stiffness(const FESpace& space, int quad_degree) {
    const std::size_t n = space.dofs_per_cell();
    // Gradients of degree-p functions are degree p-1; 2p-2 suffices exactly.
    const int degree = quad_degree >= 0 ? quad_degree : 2 * space.degree() - 2;
    return assemble_matrix(space, degree, [&](const CellValues& cv, std::vector<double>& local) {
        for (std::size_t q = 0; q < cv.num_points(); ++q) {
            const double w = cv.JxW(q);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& gi = cv.shape_grad(i, q);
                for (std::size_t j = 0; j < n; ++j) {
                    const auto& gj = cv.shape_grad(j, q);
                    local[i * n + j] += w * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
            }
        }
    });
}

SparseMatrix assemble_weighted_stiffness(const FESpace& space, const QpScalar& w,
                                         const QpVector& grad_w, int quad_degree) {
    const std::size_t n = space.dofs_per_cell();
    return assemble_matrix(space, quad_degree, [&](const CellValues& cv, std::vector<double>& local) {
        for (std::size_t q = 0; q < cv.num_points(); ++q) {
            const double jxw = cv.JxW(q);
            const double wq = w(cv, q) * jxw;
            const Vec2 gw = grad_w(cv, q);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& gi = cv.shape_grad(i, q);
                const double phi_i = cv.shape(i, q) * jxw;
                for (std::size_t j = 0; j < n; ++j) {
                    const auto& gj = cv.shape_grad(j, q);
                    local[i * n + j] +=
                        wq * (gi[0] * gj[0] + gi[1] * gj[1]) + phi_i * (gj[0] * gw[0] + gj[1] * gw[1]);
                }
            }
        }
    });
}

SparseMatrix assemble_weighted_stiffness(const FESpace& space, const ScalarField& w, double t,
                                         int quad_degree) {
    if (!w.has_gradient())
        throw InvalidParameter("assemble_weighted_stiffness: weight needs a gradient");
    return assemble_weighted_stiffness(
        space, [&](const CellValues& cv, std::size_t q) { return w(cv.point(q), t); },
        [&](const CellValues& cv, std::size_t q) { return w.gradient(cv.point(q), t); },
        quad_degree);
}

Vector assemble_load(const FESpace& space, const QpScalar& f, int quad_degree) {
    const auto rule = triangle_rule(resolve_degree(space, quad_degree));
    CellValues cv(space, rule);
    Vector b(space.num_dofs(), 0.0);
    const std::size_t n = space.dofs_per_cell();
    for (std::size_t c = 0; c < space.num_cells(); ++c) {
        cv.reinit(c);
        const auto dofs = cv.dofs();
        for (std::size_t q = 0; q < cv.num_points(); ++q) {
            const double fq = f(cv, q) * cv.JxW(q);
            if (fq == 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) b[dofs[i]] += fq * cv.shape(i, q);
        }
    }
    return b;
}

Vector assemble_load(const FESpace& space, const ScalarField& f, double t, int quad_degree) {
    return assemble_load(
        space, [&](const CellValues& cv, std::size_t q) { return f(cv.point(q), t); }, quad_degree);
}

Restriction dirichlet_restriction(const FESpace& space) {
    return Restriction(space.structure(), space.interior_dofs());
}

Vector solve_dirichlet(const Restriction& interior, const SparseMatrix& a, std::span<const double> b,
                       const SolveOptions& opts, std::span<const double> guess,
                       SolveReport* report) {
    const SparseMatrix reduced = interior.apply(a);
    const Vector rhs = interior.restrict_vector(b);
    Vector x0;
    if (!guess.empty()) x0 = interior.restrict_vector(guess);
    auto result = solve(reduced, rhs, opts, x0);
    if (report) *report = result.report;
    return interior.extend(result.x);
}

FEFunction ritz_projection(const SpacePtr& space, const ScalarField& v, double t) {
    if (!v.has_gradient()) throw InvalidParameter("ritz_projection: field needs a gradient");
    const SparseMatrix k = assemble_stiffness(*space);
    // Right-hand side (grad v, grad phi_i).
    const auto rule = triangle_rule(assembly_quadrature_degree(*space));
    CellValues cv(*space, rule);
    Vector rhs(space->num_dofs(), 0.0);
    const std::size_t n = space->dofs_per_cell();
    for (std::size_t c = 0; c < space->num_cells(); ++c) {
        cv.reinit(c);
        const auto dofs = cv.dofs();
        for (std::size_t q = 0; q < cv.num_points(); ++q) {
            const Vec2 g = v.gradient(cv.point(q), t);
            const double w = cv.JxW(q);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& gi = cv.shape_grad(i, q);
                rhs[dofs[i]] += w * (g[0] * gi[0] + g[1] * gi[1]);
            }
        }
    }
    const Restriction interior = dirichlet_restriction(*space);
    return FEFunction(space, solve_dirichlet(interior, k, rhs));
}

FEFunction nodal_interpolate(const SpacePtr& space, const ScalarField& v, double t) {
    FEFunction u(space);
    const auto& x = space->dof_coordinates();
    for (std::size_t d = 0; d < x.size(); ++d) u.coefficients[d] = v(x[d], t);
    return u;
}

FEFunction discrete_laplacian(const FEFunction& u) {
    const FESpace& space = *u.space;
    const SparseMatrix m = assemble_mass(space);
    const SparseMatrix k = assemble_stiffness(space);
    Vector rhs = matvec(k, u.coefficients);
    for (double& r : rhs) r = -r;
    const Restriction interior = dirichlet_restriction(space);
    return FEFunction(u.space, solve_dirichlet(interior, m, rhs));
}

ErrorNorms error_norms(const FEFunction& u, const ScalarField& exact, double t, int quad_degree) {
    if (!exact.has_gradient()) throw InvalidParameter("error_norms: exact field needs a gradient");
    const FESpace& space = *u.space;
    const auto rule = triangle_rule(quad_degree >= 0 ? quad_degree : error_quadrature_degree(space));
    CellValues cv(space, rule);
    double l2 = 0.0, h1 = 0.0, l6 = 0.0;
    for (std::size_t c = 0; c < space.num_cells(); ++c) {
        cv.reinit(c);
        for (std::size_t q = 0; q < cv.num_points(); ++q) {
            const Point& x = cv.point(q);
            const double e = cv.value(u.coefficients, q) - exact(x, t);
            const Vec2 gh = cv.gradient(u.coefficients, q);
            const Vec2 ge = exact.gradient(x, t);
            const double gx = gh[0] - ge[0];
            const double gy = gh[1] - ge[1];
            const double g2 = gx * gx + gy * gy;
            const double w = cv.JxW(q);
            l2 += w * e * e;
            h1 += w * g2;
            l6 += w * g2 * g2 * g2;
        }
    }
    return {std::sqrt(l2), std::sqrt(h1), std::cbrt(std::sqrt(l6))};
}

double l2_norm(const FEFunction& u) {
    return error_norms(u, ScalarField::constant(0.0), 0.0, 2 * u.space->degree()).l2;
}

double h1_seminorm(const FEFunction& u) {
    return error_norms(u, ScalarField::constant(0.0), 0.0, 2 * u.space->degree()).h1_seminorm;
}

}  // namespace thermofem

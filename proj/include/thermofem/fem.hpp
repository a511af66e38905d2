#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "thermofem/fe_space.hpp"
#include "thermofem/linalg.hpp"

namespace thermofem {

/// Quadrature degree used for assembly on a space of degree p: 2p + 2.
int assembly_quadrature_degree(const FESpace& space);
/// Quadrature degree used for error norms on a space of degree p: 2p + 4.
int error_quadrature_degree(const FESpace& space);

/// Coefficient evaluated at a quadrature point of an initialised CellValues.
using QpScalar = std::function<double(const CellValues&, std::size_t)>;
using QpVector = std::function<Vec2(const CellValues&, std::size_t)>;

/// M_ij = int w phi_i phi_j. Unit weight when `weight` is empty.
SparseMatrix assemble_mass(const FESpace& space, const QpScalar& weight = {}, int quad_degree = -1);
SparseMatrix assemble_mass(const FESpace& space, const ScalarField& weight, double t = 0.0);

/// K_ij = int grad phi_j . grad phi_i.
SparseMatrix assemble_stiffness(const FESpace& space, int quad_degree = -1);

/// A_ij = a(phi_j, w phi_i) = int w grad phi_j . grad phi_i + int (grad phi_j . grad w) phi_i.
/// Row index i is the test function. Nonsymmetric unless grad w vanishes.
SparseMatrix assemble_weighted_stiffness(const FESpace& space, const QpScalar& w,
                                         const QpVector& grad_w, int quad_degree = -1);
SparseMatrix assemble_weighted_stiffness(const FESpace& space, const ScalarField& w, double t = 0.0,
                                         int quad_degree = -1);

/// b_i = int f phi_i.
Vector assemble_load(const FESpace& space, const QpScalar& f, int quad_degree = -1);
Vector assemble_load(const FESpace& space, const ScalarField& f, double t, int quad_degree = -1);

/// Restriction of space-wide operators to the interior (non-Dirichlet) dofs.
Restriction dirichlet_restriction(const FESpace& space);

/// Solves A u = b on interior dofs with u = 0 on the boundary. A and b are
/// full-space objects; the returned vector is full length.
Vector solve_dirichlet(const Restriction& interior, const SparseMatrix& a, std::span<const double> b,
                       const SolveOptions& opts = {}, std::span<const double> guess = {},
                       SolveReport* report = nullptr);

/// Elliptic projection onto the Dirichlet-conforming subspace:
/// a(R v, phi) = (grad v, grad phi) for all interior basis functions.
FEFunction ritz_projection(const SpacePtr& space, const ScalarField& v, double t = 0.0);

/// Coefficients equal v at the dof points.
FEFunction nodal_interpolate(const SpacePtr& space, const ScalarField& v, double t = 0.0);

/// Delta_h u: (Delta_h u, phi) = -(grad u, grad phi) on the interior dofs.
FEFunction discrete_laplacian(const FEFunction& u);

struct ErrorNorms {
    double l2 = 0.0;
    double h1_seminorm = 0.0;
    double gradient_l6 = 0.0;  // || grad(u_h - u) ||_{L^6}
};

/// Norms of u_h - exact at time t. `exact` must provide a gradient.
ErrorNorms error_norms(const FEFunction& u, const ScalarField& exact, double t = 0.0,
                       int quad_degree = -1);

double l2_norm(const FEFunction& u);
double h1_seminorm(const FEFunction& u);

}  // namespace thermofem

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace thermofem {

/// Rule on the reference triangle {(xi, eta) : xi, eta >= 0, xi + eta <= 1}.
/// Weights sum to 1, so a physical integral is |K| * sum_q w_q f(x_q).
struct QuadratureRule {
    int degree = 0;                              // exact up to this total degree
    std::vector<std::array<double, 2>> points;   // reference coordinates
    std::vector<double> weights;

    std::size_t size() const noexcept { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_01(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

/// Collapsed (Duffy) tensor Gauss rule exact for polynomials of total degree
/// `degree`. Points are strictly interior and weights positive.
QuadratureRule triangle_rule(int degree);

}  // namespace thermofem

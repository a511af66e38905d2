#include "thermofem/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "thermofem/errors.hpp"

namespace thermofem {

void gauss_legendre_01(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n == 0) throw InvalidParameter("gauss_legendre_01: need at least one node");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double dk = static_cast<double>(k);
                const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = dn * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double dk = static_cast<double>(k);
            const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
            p0 = p1;
            p1 = p2;
        }
        dp = dn * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Ascending order on [0, 1].
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 0.5 * w;
    }
}

QuadratureRule triangle_rule(int degree) {
    if (degree < 0) throw InvalidParameter("triangle_rule: negative degree");
    // xi = u, eta = v (1 - u), dxi deta = (1 - u) du dv. The integrand has
    // degree + 1 in u and degree in v.
    const auto nu = static_cast<std::size_t>((degree + 2) / 2 + ((degree + 2) % 2));
    const auto nv = static_cast<std::size_t>((degree + 1) / 2 + ((degree + 1) % 2));
    std::vector<double> xu, wu, xv, wv;
    gauss_legendre_01(nu, xu, wu);
    gauss_legendre_01(nv, xv, wv);
    QuadratureRule rule;
    rule.degree = degree;
    for (std::size_t i = 0; i < nu; ++i) {
        for (std::size_t j = 0; j < nv; ++j) {
            const double u = xu[i];
            const double v = xv[j];
            rule.points.push_back({u, v * (1.0 - u)});
            // reference area is 1/2; normalise to unit total weight
            rule.weights.push_back(2.0 * wu[i] * wv[j] * (1.0 - u));
        }
    }
    return rule;
}

}  // namespace thermofem

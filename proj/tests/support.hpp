#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "thermofem/fe_space.hpp"
#include "thermofem/mesh.hpp"

namespace testing_support {

using namespace thermofem;

inline MeshPtr reference_triangle() {
    return std::make_shared<const Mesh>(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}));
}

inline MeshPtr square(std::size_t n) { return std::make_shared<const Mesh>(unit_square_mesh(n)); }

inline Vector random_vector(std::size_t n, unsigned seed, double scale = 1.0) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-scale, scale);
    Vector v(n);
    for (auto& x : v) x = d(gen);
    return v;
}

/// Random coefficient vector with zero boundary values.
inline FEFunction random_conforming(const SpacePtr& space, unsigned seed, double scale = 1.0) {
    FEFunction f(space, random_vector(space->num_dofs(), seed, scale));
    for (auto d : space->boundary_dofs()) f.coefficients[d] = 0.0;
    return f;
}

/// Reference coordinates of p in cell c, by inverting the affine map.
inline std::array<double, 2> to_reference(const Mesh& m, std::size_t c, const Point& p) {
    const auto& t = m.triangles()[c];
    const Point& a = m.vertices()[t[0]];
    const Point& b = m.vertices()[t[1]];
    const Point& d = m.vertices()[t[2]];
    const double j00 = b.x - a.x, j01 = d.x - a.x, j10 = b.y - a.y, j11 = d.y - a.y;
    const double det = j00 * j11 - j01 * j10;
    const double rx = p.x - a.x, ry = p.y - a.y;
    return {(j11 * rx - j01 * ry) / det, (-j10 * rx + j00 * ry) / det};
}

/// Evaluates an FE function at arbitrary points by brute-force cell search.
/// Independent of CellValues; meant for small meshes.
inline ScalarField fe_field(const FEFunction& u) {
    const SpacePtr space = u.space;
    const Vector coeffs = u.coefficients;
    auto locate = [space](const Point& p) {
        const Mesh& m = space->mesh();
        for (std::size_t c = 0; c < m.num_triangles(); ++c) {
            const auto r = to_reference(m, c, p);
            if (r[0] >= -1e-12 && r[1] >= -1e-12 && r[0] + r[1] <= 1.0 + 1e-12) return std::make_pair(c, r);
        }
        throw std::runtime_error("point outside mesh");
    };
    ScalarField f;
    f.value = [=](const Point& p, double) {
        const auto [c, r] = locate(p);
        const auto& el = space->element();
        std::vector<double> phi(el.num_nodes());
        el.values(r[0], r[1], phi);
        const auto dofs = space->cell_dofs(c);
        double v = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) v += phi[i] * coeffs[dofs[i]];
        return v;
    };
    f.gradient = [=](const Point& p, double) {
        const auto [c, r] = locate(p);
        const Mesh& m = space->mesh();
        const auto& t = m.triangles()[c];
        const Point& a = m.vertices()[t[0]];
        const Point& b = m.vertices()[t[1]];
        const Point& d = m.vertices()[t[2]];
        const double j00 = b.x - a.x, j01 = d.x - a.x, j10 = b.y - a.y, j11 = d.y - a.y;
        const double det = j00 * j11 - j01 * j10;
        const auto& el = space->element();
        std::vector<Vec2> g(el.num_nodes());
        el.gradients(r[0], r[1], g);
        const auto dofs = space->cell_dofs(c);
        double gx = 0.0, gy = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            // grad_x = J^{-T} grad_ref
            const double px = (j11 * g[i][0] - j10 * g[i][1]) / det;
            const double py = (-j01 * g[i][0] + j00 * g[i][1]) / det;
            gx += px * coeffs[dofs[i]];
            gy += py * coeffs[dofs[i]];
        }
        return Vec2{gx, gy};
    };
    return f;
}

inline ScalarField sine_field(double k = 2.0 * M_PI) {
    return {[k](const Point& p, double) { return std::sin(k * p.x) * std::sin(k * p.y); },
            [k](const Point& p, double) {
                return Vec2{k * std::cos(k * p.x) * std::sin(k * p.y),
                            k * std::sin(k * p.x) * std::cos(k * p.y)};
            }};
}

}  // namespace testing_support

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <vector>

namespace thermofem {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Triangle = std::array<std::size_t, 3>;

/// Conforming triangulation of a polygonal domain. Immutable once built.
///
/// Triangles are stored counterclockwise. Boundary vertices are the endpoints
/// of edges that belong to exactly one triangle.
class Mesh {
public:
    /// Validates connectivity, reorients clockwise triangles and derives the
    /// boundary. Throws InvalidParameter on bad indices or zero-area triangles.
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles);

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    std::size_t num_vertices() const noexcept { return vertices_.size(); }
    std::size_t num_triangles() const noexcept { return triangles_.size(); }

    /// Sorted list of boundary vertex indices.
    const std::vector<std::size_t>& boundary_vertices() const noexcept { return boundary_; }
    bool is_boundary_vertex(std::size_t v) const { return on_boundary_[v]; }

    /// Longest edge over all triangles.
    double h_max() const noexcept { return h_max_; }

    double signed_area(std::size_t t) const;
    double total_area() const;

private:
    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<std::size_t> boundary_;
    std::vector<bool> on_boundary_;
    double h_max_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Structured triangulation of (0,1)^2 with n subdivisions per side.
Mesh unit_square_mesh(std::size_t n);

/// Geometry of the focused-transducer domain: the rectangle
/// (-0.03,0.03)x(-0.04,0.04) joined to the circular cap of radius 0.05 between
/// polar angles -pi/4 and pi/4, with the straight segments from the rectangle
/// corners (0.03,+-0.04) to the arc end points closing the outline.
struct FocusedDomain {
    static constexpr double x_left = -0.03;
    static constexpr double x_square_right = 0.03;
    static constexpr double half_height = 0.04;
    static constexpr double radius = 0.05;

    /// y-coordinate of the arc end points, radius*sin(pi/4).
    static double arc_end_y();
    /// Right boundary abscissa for |y| <= half_height.
    static double right_boundary(double y);
    static bool contains(const Point& p, double tol = 1e-12);
    static double distance_to_boundary(const Point& p);
    /// Exact area of the curved domain.
    static double area();
};

/// Triangulates FocusedDomain with target element diameter h_target.
/// The arc is resolved by vertices lying exactly on the circle; the mesh is
/// mirror symmetric about y = 0 (vertex coordinates are exact negatives).
Mesh focused_domain_mesh(double h_target);

/// Reads Gmsh ASCII 2.2 (.msh) or the native CSV format (anything else).
Mesh load_mesh(const std::filesystem::path& path);

/// Writes the native format:
///   #vertices N
///   x,y            (N lines)
///   #triangles M
///   a,b,c          (M lines, 0-based)
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace thermofem

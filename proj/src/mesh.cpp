#include "thermofem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>

#include "thermofem/errors.hpp"

namespace thermofem {

namespace {

double cross(const Point& a, const Point& b, const Point& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double dist(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

double longest_edge(const Point& a, const Point& b, const Point& c) {
    return std::max({dist(a, b), dist(b, c), dist(c, a)});
}

bool degenerate(const Point& a, const Point& b, const Point& c) {
    const double e = longest_edge(a, b, c);
    return std::abs(cross(a, b, c)) <= 1e-12 * e * e;
}

double segment_distance(const Point& p, const Point& a, const Point& b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double s = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return std::hypot(p.x - (a.x + s * dx), p.y - (a.y + s * dy));
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    const std::size_t nv = vertices_.size();
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        auto& tri = triangles_[t];
        for (auto v : tri) {
            if (v >= nv)
                throw InvalidParameter("triangle " + std::to_string(t) + " references vertex " +
                                       std::to_string(v) + " out of range");
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw InvalidParameter("triangle " + std::to_string(t) + " repeats a vertex");
        const Point& a = vertices_[tri[0]];
        const Point& b = vertices_[tri[1]];
        const Point& c = vertices_[tri[2]];
        if (degenerate(a, b, c))
            throw InvalidParameter("triangle " + std::to_string(t) + " has zero area");
        if (cross(a, b, c) < 0.0) std::swap(tri[1], tri[2]);
        h_max_ = std::max(h_max_, longest_edge(a, b, c));
    }

    // Edge incidence counting. Boundary edges have exactly one neighbour.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(3 * triangles_.size());
    for (const auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) {
            const std::size_t a = tri[k];
            const std::size_t b = tri[(k + 1) % 3];
            edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(edges.begin(), edges.end());
    on_boundary_.assign(nv, false);
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) ++j;
        const std::size_t count = j - i;
        if (count > 2)
            throw InvalidParameter("non-manifold edge (" + std::to_string(edges[i].first) + "," +
                                   std::to_string(edges[i].second) + ")");
        if (count == 1) {
            on_boundary_[edges[i].first] = true;
            on_boundary_[edges[i].second] = true;
        }
        i = j;
    }
    for (std::size_t v = 0; v < nv; ++v)
        if (on_boundary_[v]) boundary_.push_back(v);
}

double Mesh::signed_area(std::size_t t) const {
    const auto& tri = triangles_.at(t);
    return 0.5 * cross(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh::total_area() const {
    double sum = 0.0;
    for (std::size_t t = 0; t < triangles_.size(); ++t) sum += signed_area(t);
    return sum;
}

Mesh unit_square_mesh(std::size_t n) {
    if (n == 0) throw InvalidParameter("unit_square_mesh: need at least one subdivision");
    const std::size_t np = n + 1;
    std::vector<Point> vertices;
    vertices.reserve(np * np);
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t i = 0; i <= n; ++i)
            vertices.push_back({static_cast<double>(i) / static_cast<double>(n),
                                static_cast<double>(j) / static_cast<double>(n)});
    std::vector<Triangle> triangles;
    triangles.reserve(2 * n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t v00 = j * np + i;
            const std::size_t v10 = v00 + 1;
            const std::size_t v01 = v00 + np;
            const std::size_t v11 = v01 + 1;
            triangles.push_back({v00, v10, v11});
            triangles.push_back({v00, v11, v01});
        }
    }
    return Mesh(std::move(vertices), std::move(triangles));
}

// ---------------------------------------------------------------------------
// Focused-transducer domain

double FocusedDomain::arc_end_y() { return radius * std::sin(std::numbers::pi / 4.0); }

double FocusedDomain::right_boundary(double y) {
    const double ay = std::abs(y);
    const double ya = arc_end_y();
    if (ay <= ya) return std::sqrt(radius * radius - ay * ay);
    // straight segment from (xa, ya) to (x_square_right, half_height); xa == ya
    const double s = (ay - ya) / (half_height - ya);
    return ya + s * (x_square_right - ya);
}

bool FocusedDomain::contains(const Point& p, double tol) {
    if (p.y < -half_height - tol || p.y > half_height + tol) return false;
    if (p.x < x_left - tol) return false;
    const double y = std::clamp(p.y, -half_height, half_height);
    if (std::abs(y) <= arc_end_y()) return std::hypot(p.x, p.y) <= radius + tol;
    return p.x <= right_boundary(y) + tol;
}

double FocusedDomain::distance_to_boundary(const Point& p) {
    const double ya = arc_end_y();
    const Point top_left{x_left, half_height};
    const Point top_right{x_square_right, half_height};
    const Point bot_left{x_left, -half_height};
    const Point bot_right{x_square_right, -half_height};
    const Point arc_top{ya, ya};
    const Point arc_bot{ya, -ya};
    double d = std::min({segment_distance(p, bot_left, top_left),
                         segment_distance(p, top_left, top_right),
                         segment_distance(p, bot_left, bot_right),
                         segment_distance(p, top_right, arc_top),
                         segment_distance(p, bot_right, arc_bot)});
    const double angle = std::atan2(p.y, p.x);
    if (std::abs(angle) <= std::numbers::pi / 4.0)
        d = std::min(d, std::abs(std::hypot(p.x, p.y) - radius));
    else
        d = std::min({d, dist(p, arc_top), dist(p, arc_bot)});
    return d;
}

double FocusedDomain::area() {
    const double ya = arc_end_y();
    const double left = -x_left * 2.0 * half_height;
    const double arc_part = ya * ya + radius * radius * std::numbers::pi / 4.0;
    const double slanted = (half_height - ya) * (ya + x_square_right);
    return left + arc_part + slanted;
}

Mesh focused_domain_mesh(double h_target) {
    if (!(h_target > 0.0) || !(h_target < 0.05))
        throw InvalidParameter("focused_domain_mesh: h_target must lie in (0, 0.05)");
    // Right-triangle cells whose legs are h/sqrt(2) have diameter ~h.
    const double leg = h_target / std::sqrt(2.0);
    const double ya = FocusedDomain::arc_end_y();
    const double H = FocusedDomain::half_height;
    const auto segments = [&](double length) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / leg - 1e-9)));
    };
    const std::size_t m_arc = segments(ya);
    const std::size_t m_top = segments(H - ya);

    // Non-negative row ordinates; the lower half is the exact mirror image.
    std::vector<double> upper;
    for (std::size_t k = 0; k <= m_arc; ++k)
        upper.push_back(k == m_arc ? ya : ya * static_cast<double>(k) / static_cast<double>(m_arc));
    for (std::size_t k = 1; k <= m_top; ++k)
        upper.push_back(k == m_top ? H
                                   : ya + (H - ya) * static_cast<double>(k) /
                                              static_cast<double>(m_top));
    std::vector<double> rows;
    for (std::size_t k = upper.size(); k-- > 1;) rows.push_back(-upper[k]);
    for (double y : upper) rows.push_back(y);
    const std::size_t ny = rows.size() - 1;
    const std::size_t center = upper.size() - 1;  // index of y == 0

    const double max_width = FocusedDomain::radius - FocusedDomain::x_left;
    const std::size_t nx = segments(max_width);
    const std::size_t np = nx + 1;

    std::vector<Point> vertices;
    vertices.reserve(np * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j) {
        const double y = rows[j];
        const double xr = FocusedDomain::right_boundary(y);
        for (std::size_t i = 0; i <= nx; ++i) {
            double x;
            if (i == 0)
                x = FocusedDomain::x_left;
            else if (i == nx)
                x = xr;
            else
                x = FocusedDomain::x_left + (xr - FocusedDomain::x_left) *
                                                (static_cast<double>(i) / static_cast<double>(nx));
            vertices.push_back({x, y});
        }
    }
    std::vector<Triangle> triangles;
    triangles.reserve(2 * nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t v00 = j * np + i;
            const std::size_t v10 = v00 + 1;
            const std::size_t v01 = v00 + np;
            const std::size_t v11 = v01 + 1;
            if (j >= center) {
                triangles.push_back({v00, v10, v11});
                triangles.push_back({v00, v11, v01});
            } else {
                triangles.push_back({v00, v10, v01});
                triangles.push_back({v10, v11, v01});
            }
        }
    }
    return Mesh(std::move(vertices), std::move(triangles));
}

// ---------------------------------------------------------------------------
// I/O

namespace {

struct LineReader {
    std::ifstream in;
    std::size_t line_no = 0;
    std::string line;

    bool next() {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") != std::string::npos) return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_no); }
    void expect_more(const char* what) {
        if (!next()) fail(std::string("unexpected end of file, expected ") + what);
    }
};

template <typename T>
T parse_number(const std::string& token, const LineReader& r) {
    std::istringstream ss(token);
    T value{};
    ss >> value;
    if (ss.fail() || !ss.eof()) r.fail("malformed number '" + token + "'");
    return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string token;
    std::istringstream ss(line);
    if (sep == ' ') {
        while (ss >> token) out.push_back(token);
    } else {
        while (std::getline(ss, token, sep)) {
            const auto b = token.find_first_not_of(" \t");
            const auto e = token.find_last_not_of(" \t");
            out.push_back(b == std::string::npos ? std::string{} : token.substr(b, e - b + 1));
        }
    }
    return out;
}

void check_triangle(const std::vector<Point>& v, const Triangle& t, const LineReader& r) {
    for (auto idx : t)
        if (idx >= v.size()) r.fail("vertex index " + std::to_string(idx) + " out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) r.fail("triangle repeats a vertex");
    if (degenerate(v[t[0]], v[t[1]], v[t[2]])) r.fail("degenerate (zero-area) triangle");
}

Mesh read_gmsh(LineReader& r) {
    bool seen_format = false;
    std::unordered_map<long, std::size_t> node_index;
    std::vector<Point> nodes;
    std::vector<std::array<long, 3>> raw_tris;
    std::vector<std::size_t> tri_lines;
    while (r.next()) {
        const auto head = split(r.line, ' ');
        if (head.empty()) continue;
        if (head[0] == "$MeshFormat") {
            r.expect_more("format line");
            const auto f = split(r.line, ' ');
            if (f.size() < 3) r.fail("malformed $MeshFormat line");
            if (f[0].rfind("2.", 0) != 0) r.fail("unsupported Gmsh version " + f[0]);
            if (f[1] != "0") r.fail("binary Gmsh files are not supported");
            r.expect_more("$EndMeshFormat");
            if (split(r.line, ' ').at(0) != "$EndMeshFormat") r.fail("expected $EndMeshFormat");
            seen_format = true;
        } else if (head[0] == "$Nodes") {
            r.expect_more("node count");
            const auto count = parse_number<std::size_t>(split(r.line, ' ').at(0), r);
            nodes.reserve(count);
            for (std::size_t k = 0; k < count; ++k) {
                r.expect_more("node line");
                const auto f = split(r.line, ' ');
                if (f.size() < 3) r.fail("malformed node line");
                const long id = parse_number<long>(f[0], r);
                if (!node_index.emplace(id, nodes.size()).second)
                    r.fail("duplicate node id " + f[0]);
                nodes.push_back({parse_number<double>(f[1], r), parse_number<double>(f[2], r)});
            }
            r.expect_more("$EndNodes");
            if (split(r.line, ' ').at(0) != "$EndNodes") r.fail("expected $EndNodes");
        } else if (head[0] == "$Elements") {
            r.expect_more("element count");
            const auto count = parse_number<std::size_t>(split(r.line, ' ').at(0), r);
            for (std::size_t k = 0; k < count; ++k) {
                r.expect_more("element line");
                const auto f = split(r.line, ' ');
                if (f.size() < 3) r.fail("malformed element line");
                const int type = parse_number<int>(f[1], r);
                const auto ntags = parse_number<std::size_t>(f[2], r);
                if (type != 2) continue;  // only 3-node triangles carry the mesh
                if (f.size() != 3 + ntags + 3) r.fail("triangle element needs 3 nodes");
                std::array<long, 3> ids{};
                for (int m = 0; m < 3; ++m) ids[m] = parse_number<long>(f[3 + ntags + m], r);
                raw_tris.push_back(ids);
                tri_lines.push_back(r.line_no);
            }
            r.expect_more("$EndElements");
            if (split(r.line, ' ').at(0) != "$EndElements") r.fail("expected $EndElements");
        } else if (head[0].front() == '$') {
            // Skip unknown sections ($PhysicalNames, $NodeData, ...).
            const std::string end = "$End" + head[0].substr(1);
            do {
                r.expect_more(end.c_str());
            } while (split(r.line, ' ').at(0) != end);
        } else {
            r.fail("unexpected content '" + r.line + "'");
        }
    }
    if (!seen_format) throw ParseError("missing $MeshFormat section", 0);
    if (raw_tris.empty()) throw ParseError("no triangle elements found", r.line_no);

    // Keep only nodes referenced by triangles, in node-section order.
    std::vector<bool> used(nodes.size(), false);
    std::vector<Triangle> tris(raw_tris.size());
    for (std::size_t t = 0; t < raw_tris.size(); ++t) {
        for (int m = 0; m < 3; ++m) {
            auto it = node_index.find(raw_tris[t][m]);
            if (it == node_index.end())
                throw ParseError("unknown node id " + std::to_string(raw_tris[t][m]),
                                 tri_lines[t]);
            tris[t][m] = it->second;
            used[it->second] = true;
        }
    }
    std::vector<std::size_t> remap(nodes.size(), 0);
    std::vector<Point> vertices;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (used[k]) {
            remap[k] = vertices.size();
            vertices.push_back(nodes[k]);
        }
    }
    for (std::size_t t = 0; t < tris.size(); ++t) {
        for (auto& v : tris[t]) v = remap[v];
        LineReader fake;
        fake.line_no = tri_lines[t];
        check_triangle(vertices, tris[t], fake);
    }
    return Mesh(std::move(vertices), std::move(tris));
}

std::size_t parse_header(LineReader& r, const std::string& key) {
    const auto f = split(r.line, ' ');
    if (f.size() != 2 || f[0] != key) r.fail("expected '" + key + " <count>'");
    return parse_number<std::size_t>(f[1], r);
}

Mesh read_native(LineReader& r) {
    if (!r.next()) throw ParseError("empty mesh file", 0);
    const std::size_t nv = parse_header(r, "#vertices");
    std::vector<Point> vertices;
    vertices.reserve(nv);
    for (std::size_t k = 0; k < nv; ++k) {
        r.expect_more("vertex line");
        const auto f = split(r.line, ',');
        if (f.size() != 2) r.fail("vertex line needs 'x,y'");
        vertices.push_back({parse_number<double>(f[0], r), parse_number<double>(f[1], r)});
    }
    r.expect_more("#triangles header");
    const std::size_t nt = parse_header(r, "#triangles");
    std::vector<Triangle> tris;
    tris.reserve(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        r.expect_more("triangle line");
        const auto f = split(r.line, ',');
        if (f.size() != 3) r.fail("triangle line needs 'a,b,c'");
        Triangle t{parse_number<std::size_t>(f[0], r), parse_number<std::size_t>(f[1], r),
                   parse_number<std::size_t>(f[2], r)};
        check_triangle(vertices, t, r);
        tris.push_back(t);
    }
    if (r.next()) r.fail("trailing content after triangles");
    return Mesh(std::move(vertices), std::move(tris));
}

}  // namespace

Mesh load_mesh(const std::filesystem::path& path) {
    LineReader r;
    r.in.open(path);
    if (!r.in) throw ParseError("cannot open mesh file '" + path.string() + "'", 0);
    if (path.extension() == ".msh") return read_gmsh(r);
    return read_native(r);
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write mesh file '" + path.string() + "'");
    out << std::setprecision(17);
    out << "#vertices " << mesh.num_vertices() << '\n';
    for (const auto& p : mesh.vertices()) out << p.x << ',' << p.y << '\n';
    out << "#triangles " << mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles()) out << t[0] << ',' << t[1] << ',' << t[2] << '\n';
    if (!out) throw Error("failed writing mesh file '" + path.string() + "'");
}

}  // namespace thermofem

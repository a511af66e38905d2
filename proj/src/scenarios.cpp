#include "thermofem/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "thermofem/errors.hpp"
#include "thermofem/mesh.hpp"

namespace thermofem {

bool PolarSupport::contains(const Point& p) const {
    const double r = std::hypot(p.x, p.y);
    if (r > r0) return false;
    if (r == 0.0) return true;
    return std::abs(std::atan2(p.y, p.x)) <= max_angle;
}

namespace {

double angular_factor(const Point& p) { return std::cos(1.75 * std::atan2(p.y, p.x)); }

double focused_profile(const Point& p, double amplitude, const PolarSupport& s, bool rate) {
    if (!s.contains(p)) return 0.0;
    const double r = std::hypot(p.x, p.y);
    if (r == 0.0) return 0.0;
    const double k = 3.0 * std::numbers::pi * r / s.r0;
    const double osc = 15.0 * std::numbers::pi * r / s.r0;
    return amplitude * angular_factor(p) * k * std::exp(-k) * (rate ? std::cos(osc) : std::sin(osc));
}

}  // namespace

double focused_g0(const Point& p, double amplitude, const PolarSupport& s) {
    return focused_profile(p, amplitude, s, false);
}

double focused_g1(const Point& p, double amplitude, const PolarSupport& s) {
    return focused_profile(p, amplitude, s, true);
}

InitialData example2_initial_data(double amplitude, const PolarSupport& s) {
    InitialData d;
    d.u0.value = [=](const Point& p, double) { return focused_g0(p, amplitude, s); };
    d.u1.value = [=](const Point& p, double) { return focused_g1(p, amplitude, s); };
    d.theta0 = ScalarField::constant(0.0);
    d.projection = InitialProjection::Nodal;
    return d;
}

double example3_source(const Point& p, double t, double amplitude, double frequency,
                       const PolarSupport& s) {
    if (!s.contains(p)) return 0.0;
    const double r = std::hypot(p.x, p.y);
    if (r == 0.0) return 0.0;
    const double radial = (r / s.r0) * (std::exp(-40.0 * r / s.r0) - std::exp(-40.0));
    return amplitude * angular_factor(p) * radial *
           std::cos(2.0 * std::numbers::pi * frequency * t);
}

std::string to_string(ExampleKind k) {
    return k == ExampleKind::InitialExcitation ? "initial_excitation" : "source_excitation";
}

ExampleKind parse_example(const std::string& s) {
    if (s == "initial_excitation") return ExampleKind::InitialExcitation;
    if (s == "source_excitation") return ExampleKind::SourceExcitation;
    throw InvalidParameter("unknown example '" + s + "'");
}

std::string to_string(SnapshotFormat f) { return f == SnapshotFormat::Csv ? "csv" : "vtk"; }

SnapshotFormat parse_snapshot_format(const std::string& s) {
    if (s == "vtk") return SnapshotFormat::VtkLegacy;
    if (s == "csv") return SnapshotFormat::Csv;
    throw InvalidParameter("unknown snapshot format '" + s + "'");
}

void ScenarioConfig::validate() const {
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(final_time > 0.0)) throw ConfigError("final_time must be positive");
    std::size_t steps = 0;
    try {
        steps = steps_for(final_time, tau);
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
    if (degree < 1 || degree > 3) throw ConfigError("degree must be 1, 2 or 3");
    if (mesh_file.empty() && !(mesh_h > 0.0 && mesh_h < FocusedDomain::radius))
        throw ConfigError("mesh_h must lie in (0, 0.05)");
    for (auto s : snapshots)
        if (s == 0 || s > steps)
            throw ConfigError("snapshot index " + std::to_string(s) + " outside 1.." +
                              std::to_string(steps));
    if (!(model.frequency > 0.0) || !(model.density > 0.0) || model.speed.coefficients.empty())
        throw ConfigError("acoustic model needs positive frequency, density and a speed law");
    if (!(heat.kappa > 0.0) || heat.nu < 0.0) throw ConfigError("need kappa > 0 and nu >= 0");
    if (!(fixed_point.tol > 0.0) || fixed_point.max_iter == 0)
        throw ConfigError("fixed-point tolerance and max_iter must be positive");
}

ScenarioConfig ScenarioConfig::example2() {
    ScenarioConfig c;
    c.name = "example2";
    c.example = ExampleKind::InitialExcitation;
    c.variant = EquationVariant::westervelt();
    c.model.speed = quintic_liver_law();
    c.model.frequency = 1e5;
    c.heat = derived_heat_params(TissueConstants{});
    c.amplitude = 1e6;
    c.snapshots = {10, 50, 100, 200, 300};
    return c;
}

ScenarioConfig ScenarioConfig::example3() {
    ScenarioConfig c = example2();
    c.name = "example3";
    c.example = ExampleKind::SourceExcitation;
    c.variant = EquationVariant::kuznetsov();
    c.amplitude = 1e8;
    c.snapshots = {200, 300, 400};
    return c;
}

SpacePtr scenario_space(const ScenarioConfig& config) {
    auto mesh = std::make_shared<const Mesh>(config.mesh_file.empty()
                                                 ? focused_domain_mesh(config.mesh_h)
                                                 : load_mesh(config.mesh_file));
    return build_space(mesh, config.degree);
}

CoupledProblem scenario_problem(const ScenarioConfig& config) {
    CoupledProblem p;
    p.variant = config.variant;
    p.model = config.model;
    p.heat = config.heat;
    if (config.example == ExampleKind::SourceExcitation) {
        const double a = config.amplitude;
        const double f = config.model.frequency;
        p.wave_source = [a, f](const Point& x, double t) { return example3_source(x, t, a, f); };
    }
    return p;
}

namespace {

double max_abs(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

ScenarioResult run_example(const ScenarioConfig& config) {
    config.validate();
    const SpacePtr space = scenario_space(config);
    InitialData data;
    if (config.example == ExampleKind::InitialExcitation) {
        data = example2_initial_data(config.amplitude);
    } else {
        data.u0 = ScalarField::constant(0.0);
        data.u1 = ScalarField::constant(0.0);
        data.theta0 = ScalarField::constant(0.0);
    }
    data.projection = config.projection;

    SimulationConfig sim;
    sim.scheme = config.scheme;
    sim.tau = config.tau;
    sim.num_steps = steps_for(config.final_time, config.tau);
    sim.fixed_point = config.fixed_point;
    sim.linear = config.linear;

    ScenarioResult result;
    auto& summary = result.summary;
    summary.name = config.name;
    summary.num_elements = space->num_cells();
    summary.num_dofs = space->num_dofs();
    if (!config.output_dir.empty()) std::filesystem::create_directories(config.output_dir);

    const auto wanted = [&](std::size_t step) {
        return std::find(config.snapshots.begin(), config.snapshots.end(), step) !=
               config.snapshots.end();
    };
    const auto hook = [&](const SimulationState& s) {
        const double mu = max_abs(s.u[0].coefficients);
        const double mt = max_abs(s.theta[0].coefficients);
        summary.time.push_back(s.time);
        summary.max_abs_u.push_back(mu);
        summary.max_abs_theta.push_back(mt);
        summary.max_u = std::max(summary.max_u, mu);
        summary.max_theta = std::max(summary.max_theta, mt);
        if (!wanted(s.step)) return;
        result.snapshots.push_back({s.step, s.time, s.u[0], s.theta[0]});
        if (config.output_dir.empty()) return;
        std::ostringstream stem;
        stem << config.name << '_' << std::setw(4) << std::setfill('0') << s.step;
        for (auto f : config.formats)
            summary.files.push_back(
                export_snapshot(s.u[0], s.theta[0], config.output_dir / stem.str(), f));
    };
    auto sim_result = run_simulation(space, data, scenario_problem(config), sim, hook);
    for (const auto& r : sim_result.reports) summary.iterations.push_back(r.iterations);
    result.final_state = std::move(sim_result.state);

    if (!config.output_dir.empty()) {
        const auto path = config.output_dir / (config.name + "_summary.json");
        std::ofstream out(path);
        if (!out) throw Error("cannot open " + path.string());
        write_summary_json(out, summary);
        summary.files.push_back(path);
    }
    return result;
}

void write_summary_json(std::ostream& out, const ScenarioSummary& summary) {
    nlohmann::ordered_json j;
    j["name"] = summary.name;
    j["num_elements"] = summary.num_elements;
    j["num_dofs"] = summary.num_dofs;
    j["max_u"] = summary.max_u;
    j["max_theta"] = summary.max_theta;
    j["time"] = summary.time;
    j["max_abs_u"] = summary.max_abs_u;
    j["max_abs_theta"] = summary.max_abs_theta;
    j["iterations"] = summary.iterations;
    std::vector<std::string> files;
    for (const auto& f : summary.files) files.push_back(f.filename().string());
    j["snapshot_files"] = files;
    out << j.dump(2) << '\n';
}

namespace {

struct PlotGrid {
    std::vector<Point> points;
    std::vector<Triangle> cells;
    std::vector<double> u, theta;
};

PlotGrid plot_grid(const FEFunction& u, const FEFunction& theta) {
    const FESpace& space = *u.space;
    const Mesh& mesh = space.mesh();
    PlotGrid g;
    if (space.degree() == 1) {
        g.points = mesh.vertices();
        g.cells = mesh.triangles();
        g.u = u.coefficients;
        g.theta = theta.coefficients;
        return g;
    }
    // Vertices keep their ids; one extra point per edge midpoint.
    g.points = mesh.vertices();
    g.u.assign(u.coefficients.begin(), u.coefficients.begin() + mesh.num_vertices());
    g.theta.assign(theta.coefficients.begin(), theta.coefficients.begin() + mesh.num_vertices());
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoints;
    const auto& el = space.element();
    std::vector<double> phi(el.num_nodes());
    constexpr std::array<std::array<double, 2>, 3> ref_mid{{{0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}}};
    for (std::size_t c = 0; c < mesh.num_triangles(); ++c) {
        const auto& t = mesh.triangles()[c];
        const auto dofs = space.cell_dofs(c);
        std::array<std::size_t, 3> m{};
        for (int e = 0; e < 3; ++e) {
            const std::size_t a = t[e], b = t[(e + 1) % 3];
            const auto key = std::minmax(a, b);
            auto [it, inserted] = midpoints.try_emplace({key.first, key.second}, g.points.size());
            if (inserted) {
                const auto& pa = mesh.vertices()[a];
                const auto& pb = mesh.vertices()[b];
                g.points.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
                el.values(ref_mid[e][0], ref_mid[e][1], phi);
                double vu = 0.0, vt = 0.0;
                for (std::size_t i = 0; i < phi.size(); ++i) {
                    vu += phi[i] * u.coefficients[dofs[i]];
                    vt += phi[i] * theta.coefficients[dofs[i]];
                }
                g.u.push_back(vu);
                g.theta.push_back(vt);
            }
            m[e] = it->second;
        }
        g.cells.push_back({t[0], m[0], m[2]});
        g.cells.push_back({m[0], t[1], m[1]});
        g.cells.push_back({m[2], m[1], t[2]});
        g.cells.push_back({m[0], m[1], m[2]});
    }
    return g;
}

}  // namespace

void write_vtk(std::ostream& out, const FEFunction& u, const FEFunction& theta) {
    if (u.space != theta.space) throw InvalidParameter("write_vtk: fields on different spaces");
    const PlotGrid g = plot_grid(u, theta);
    out << std::setprecision(17);
    out << "# vtk DataFile Version 2.0\nthermofem snapshot\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << g.points.size() << " double\n";
    for (const auto& p : g.points) out << p.x << ' ' << p.y << " 0\n";
    out << "CELLS " << g.cells.size() << ' ' << 4 * g.cells.size() << '\n';
    for (const auto& c : g.cells) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    out << "CELL_TYPES " << g.cells.size() << '\n';
    for (std::size_t i = 0; i < g.cells.size(); ++i) out << "5\n";
    out << "POINT_DATA " << g.points.size() << '\n';
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (double v : g.u) out << v << '\n';
    out << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
    for (double v : g.theta) out << v << '\n';
}

void write_snapshot_csv(std::ostream& out, const FEFunction& u, const FEFunction& theta) {
    if (u.space != theta.space) throw InvalidParameter("write_snapshot_csv: fields on different spaces");
    const auto& x = u.space->dof_coordinates();
    out << "x1,x2,u,theta\n" << std::setprecision(17);
    for (std::size_t d = 0; d < x.size(); ++d)
        out << x[d].x << ',' << x[d].y << ',' << u.coefficients[d] << ',' << theta.coefficients[d]
            << '\n';
}

std::filesystem::path export_snapshot(const FEFunction& u, const FEFunction& theta,
                                      const std::filesystem::path& stem, SnapshotFormat format) {
    std::filesystem::path path = stem;
    path += format == SnapshotFormat::Csv ? ".csv" : ".vtk";
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    if (format == SnapshotFormat::Csv)
        write_snapshot_csv(out, u, theta);
    else
        write_vtk(out, u, theta);
    if (!out) throw Error("failed writing " + path.string());
    return path;
}

std::vector<std::size_t> mirror_map(const Mesh& mesh, double tol) {
    const auto& v = mesh.vertices();
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
    const auto less = [&](const Point& a, const Point& b) {
        if (std::abs(a.x - b.x) > tol) return a.x < b.x;
        if (std::abs(a.y - b.y) > tol) return a.y < b.y;
        return false;
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return less(v[a], v[b]); });
    std::vector<std::size_t> map(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point target{v[i].x, -v[i].y};
        auto it = std::lower_bound(order.begin(), order.end(), target,
                                   [&](std::size_t a, const Point& p) { return less(v[a], p); });
        if (it == order.end() || less(target, v[*it]))
            throw InvalidParameter("vertex " + std::to_string(i) + " has no mirror image");
        map[i] = *it;
    }
    return map;
}

}  // namespace thermofem

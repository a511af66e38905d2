#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

#include "thermofem/coefficients.hpp"
#include "thermofem/fe_space.hpp"
#include "thermofem/stepping.hpp"

namespace thermofem {

/// Polar support {|angle| <= 2 pi / 7, r <= r0} of the focused excitations.
struct PolarSupport {
    double r0 = 0.048;
    double max_angle = 2.0 * std::numbers::pi / 7.0;

    bool contains(const Point& p) const;
};

/// Initial pressure and rate of the focused-wave example, zero off the support.
///   g0 = A cos(7a/4) (3 pi r/r0) exp(-3 pi r/r0) sin(15 pi r/r0)
///   g1 = same with cos(15 pi r/r0)
double focused_g0(const Point& p, double amplitude = 1e6, const PolarSupport& s = {});
double focused_g1(const Point& p, double amplitude = 1e6, const PolarSupport& s = {});

/// (u0, u1, theta0 = 0). No gradients: use nodal projection.
InitialData example2_initial_data(double amplitude = 1e6, const PolarSupport& s = {});

/// A cos(7a/4) (r/r0) (exp(-40 r/r0) - exp(-40)) cos(2 pi frequency t) on the support.
double example3_source(const Point& p, double t, double amplitude = 1e8, double frequency = 1e5,
                       const PolarSupport& s = {});

enum class ExampleKind { InitialExcitation, SourceExcitation };

std::string to_string(ExampleKind k);
ExampleKind parse_example(const std::string& s);

enum class SnapshotFormat { VtkLegacy, Csv };

std::string to_string(SnapshotFormat f);
SnapshotFormat parse_snapshot_format(const std::string& s);

struct ScenarioConfig {
    std::string name = "example2";
    ExampleKind example = ExampleKind::InitialExcitation;
    /// Built-in focused mesh with this target diameter unless mesh_file is set.
    double mesh_h = 7.6e-4;
    std::filesystem::path mesh_file;
    int degree = 1;
    SchemeKind scheme = SchemeKind::BDF2;
    double tau = 1e-7;
    double final_time = 4e-5;
    EquationVariant variant = EquationVariant::westervelt();
    AcousticModel model;
    HeatParams heat;
    double amplitude = 1e6;
    InitialProjection projection = InitialProjection::Nodal;
    std::vector<std::size_t> snapshots{10, 50, 100, 200, 300};
    std::vector<SnapshotFormat> formats{SnapshotFormat::VtkLegacy};
    /// No files are written when empty.
    std::filesystem::path output_dir;
    FixedPointConfig fixed_point;
    SolveOptions linear;

    /// Throws ConfigError.
    void validate() const;

    static ScenarioConfig example2();
    static ScenarioConfig example3();
};

struct ScenarioSummary {
    std::string name;
    std::size_t num_elements = 0;
    std::size_t num_dofs = 0;
    std::vector<double> time;
    std::vector<double> max_abs_u;
    std::vector<double> max_abs_theta;
    std::vector<std::size_t> iterations;
    double max_u = 0.0;      // over the whole run
    double max_theta = 0.0;  // over the whole run
    std::vector<std::filesystem::path> files;
};

struct Snapshot {
    std::size_t step = 0;
    double time = 0.0;
    FEFunction u;
    FEFunction theta;
};

struct ScenarioResult {
    ScenarioSummary summary;
    std::vector<Snapshot> snapshots;
    SimulationState final_state;
};

SpacePtr scenario_space(const ScenarioConfig& config);
CoupledProblem scenario_problem(const ScenarioConfig& config);

ScenarioResult run_example(const ScenarioConfig& config);

void write_summary_json(std::ostream& out, const ScenarioSummary& summary);

/// VTK legacy ASCII with point scalars "pressure" and "temperature". Degree > 1
/// fields are sampled on the 4-way refined P1 triangulation.
void write_vtk(std::ostream& out, const FEFunction& u, const FEFunction& theta);
/// x1,x2,u,theta per dof.
void write_snapshot_csv(std::ostream& out, const FEFunction& u, const FEFunction& theta);

/// Writes <stem>.vtk or <stem>.csv. Throws Error when the file cannot be opened.
std::filesystem::path export_snapshot(const FEFunction& u, const FEFunction& theta,
                                      const std::filesystem::path& stem, SnapshotFormat format);

/// Index of the vertex at (x, -y) for every vertex; throws when a vertex has no mirror.
std::vector<std::size_t> mirror_map(const Mesh& mesh, double tol = 1e-12);

}  // namespace thermofem

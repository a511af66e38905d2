#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thermofem/coefficients.hpp"
#include "thermofem/fe_space.hpp"
#include "thermofem/stepping.hpp"

namespace thermofem {

/// u = A1 sin(2 pi x) sin(2 pi y) exp(lambda1 t),
/// theta = A2 sin(4 pi x) sin(4 pi y) exp(-lambda2 t) on the unit square.
struct ManufacturedPair {
    double a1 = 1.0;
    double a2 = 1e-4;
    double lambda1 = 1.0;
    double lambda2 = 0.5;

    double u(const Point& x, double t) const;
    double u_t(const Point& x, double t) const;
    double u_tt(const Point& x, double t) const;
    Vec2 grad_u(const Point& x, double t) const;
    Vec2 grad_u_t(const Point& x, double t) const;
    double lap_u(const Point& x, double t) const;
    double lap_u_t(const Point& x, double t) const;

    double theta(const Point& x, double t) const;
    double theta_t(const Point& x, double t) const;
    Vec2 grad_theta(const Point& x, double t) const;
    Vec2 grad_theta_t(const Point& x, double t) const;
    double lap_theta(const Point& x, double t) const;

    ScalarField u_field() const;
    ScalarField u_t_field() const;
    ScalarField theta_field() const;
    ScalarField theta_t_field() const;
};

/// f = u_tt - q(theta) lap u - beta(theta) lap u_t + N(u, theta) at the exact pair.
double mms_wave_source(const ManufacturedPair& pair, const EquationVariant& variant,
                       const AcousticModel& model, const Point& x, double t);

/// g = theta_t - kappa lap theta + nu theta - Q(u, u_t, theta) at the exact pair.
double mms_heat_source(const ManufacturedPair& pair, const EquationVariant& variant,
                       const AcousticModel& model, const HeatParams& heat, const Point& x,
                       double t);

/// Coupled problem with both manufactured sources attached.
CoupledProblem mms_problem(const ManufacturedPair& pair, const EquationVariant& variant,
                           const AcousticModel& model, const HeatParams& heat);

struct TotalError {
    double e_tau = 0.0;     // energy-type error
    double l2 = 0.0;        // ||u - u_h|| + ||theta - theta_h||
};

/// Errors of a state that has completed at least one step, measured at state.time.
/// The discrete rates use the scheme of the last completed step.
TotalError total_error(const SimulationState& state, const ManufacturedPair& pair, double tau,
                       int quad_degree = -1);

struct ConvergenceConfig {
    std::vector<std::size_t> mesh_sizes{8, 16, 32, 64};  // unit square subdivisions
    int degree = 1;
    SchemeKind scheme = SchemeKind::Euler;
    EquationVariant variant;
    double tau = 1.0 / 128.0;
    double final_time = 1.0;
    ManufacturedPair pair;
    AcousticModel model;
    HeatParams heat;
    InitialProjection projection = InitialProjection::Ritz;
    FixedPointConfig fixed_point;
    SolveOptions linear;
    std::size_t jobs = 1;

    /// Throws ConfigError on invalid settings.
    void validate() const;
};

struct ErrorEntry {
    std::size_t n = 0;
    double h = 0.0;
    double e_tau = 0.0;
    double l2 = 0.0;
    std::size_t max_iterations = 0;  // fixed-point iterations, worst step
};

struct ErrorReport {
    std::vector<ErrorEntry> entries;  // ordered by decreasing h
    std::vector<double> rates_e;      // rates_e[i] between entries i and i+1
    std::vector<double> rates_l2;
};

/// log(e0 / e1) / log(h0 / h1) for successive entries.
std::vector<double> successive_rates(const std::vector<double>& h, const std::vector<double>& e);

struct ObservedRate {
    double rate = 0.0;
    std::size_t pair = 0;   // index into the rate list
    bool plateau = false;
    std::size_t plateau_pair = 0;  // first pair after a drop > 0.5, when plateau is set
};

/// Finest-pair rate, or the pair preceding the first drop of more than 0.5.
ObservedRate observed_rate(const std::vector<double>& rates);

/// One run of the manufactured problem on the n x n unit-square mesh.
ErrorEntry run_mms_case(const ConvergenceConfig& config, std::size_t n);

/// Runs every mesh of the study. On failure the entries finished so far are
/// left in `partial` (when given) and the error propagates.
ErrorReport convergence_study(const ConvergenceConfig& config, ErrorReport* partial = nullptr);

/// Columns h,E_tau,L2_error,rate_E,rate_L2. The first row has empty rates.
void write_error_csv(std::ostream& out, const ErrorReport& report);
/// "log10_h log10_E" pairs.
void write_plot_data(std::ostream& out, const ErrorReport& report);

}  // namespace thermofem

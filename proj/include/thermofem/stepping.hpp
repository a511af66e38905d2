#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermofem/coefficients.hpp"
#include "thermofem/fe_space.hpp"
#include "thermofem/fem.hpp"
#include "thermofem/linalg.hpp"

namespace thermofem {

enum class SchemeKind { Euler, BDF2 };

std::string to_string(SchemeKind k);
SchemeKind parse_scheme(const std::string& s);

/// Backward differentiation weights. With the history a^n, a^{n-1}, a^{n-2}:
///   d_tau a^{n+1}   = (sigma1 a^{n+1} - delta1 a^n) / tau
///   d_tau^2 a^{n+1} = (sigma2 a^{n+1} - delta2 a^n) / tau^2
struct TimeScheme {
    SchemeKind kind = SchemeKind::Euler;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    std::size_t history_depth = 2;  // past levels delta2 needs

    static TimeScheme euler() { return {SchemeKind::Euler, 1.0, 1.0, 2}; }
    static TimeScheme bdf2() { return {SchemeKind::BDF2, 1.5, 2.0, 3}; }
    static TimeScheme from_kind(SchemeKind k) { return k == SchemeKind::BDF2 ? bdf2() : euler(); }
};

struct HistoryCombos {
    Vector delta1;
    Vector delta2;
};

/// history[0] = a^n, history[1] = a^{n-1}, history[2] = a^{n-2}.
/// Throws InvalidParameter when fewer than scheme.history_depth levels are given.
HistoryCombos history_combos(const TimeScheme& scheme,
                             std::span<const std::span<const double>> history);

/// delta1 only; needs one level for Euler and two for BDF2.
Vector history_delta1(const TimeScheme& scheme, std::span<const double> an,
                      std::span<const double> anm1);

/// (sigma1 a^{n+1} - delta1 a^n) / tau.
Vector discrete_rate(const TimeScheme& scheme, double tau, std::span<const double> anp1,
                     std::span<const double> an, std::span<const double> anm1);

struct FixedPointConfig {
    double tol = 1e-10;
    std::size_t max_iter = 100;
    /// Skip the confirming second solve when the nonlinearity vanishes
    /// identically (k_W = k_K = 0 and no gradient coupling).
    bool detect_linear = true;
};

/// The coupled model: wave variant, material laws, heat parameters and sources.
struct CoupledProblem {
    EquationVariant variant;
    AcousticModel model;
    HeatParams heat;
    /// Wave source f(x, t); empty means f = 0.
    std::function<double(const Point&, double)> wave_source;
    /// Extra heat source g(x, t) used by manufactured solutions; empty means 0.
    std::function<double(const Point&, double)> heat_source;
    /// Overrides for linear-regime studies: force k_W = k_K = 0 and no coupling.
    bool linear_wave = false;
    /// Overrides for the absorbed energy: when set, Q = 0.
    bool disable_absorption = false;
};

/// Time levels kept by the driver. u[0] = u^n, u[1] = u^{n-1}, u[2] = u^{n-2};
/// theta likewise.
struct SimulationState {
    std::size_t step = 0;
    double time = 0.0;
    std::array<FEFunction, 3> u;
    std::array<FEFunction, 3> theta;
    /// Scheme used for the most recent step (Euler before any step).
    TimeScheme last_scheme = TimeScheme::euler();
};

struct StepReport {
    std::size_t step = 0;  // index n+1 of the computed level
    SchemeKind scheme = SchemeKind::Euler;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    std::size_t iterations = 0;
    double final_increment = 0.0;
    std::vector<double> increments;
    double n1_min = 1.0;
    std::vector<SolveReport> wave_solves;
    SolveReport heat_solve;
};

void write_step_reports_csv(std::ostream& out, std::span<const StepReport> reports);

/// Assembles and solves one time step of the coupled scheme on a fixed space.
/// Holds the operators that do not change between steps.
class CoupledStepper {
public:
    CoupledStepper(SpacePtr space, CoupledProblem problem, double tau,
                   FixedPointConfig fp = {}, SolveOptions linear = {});

    /// Fixed-point iteration for u^{n+1}. Reads u history and theta^n.
    FEFunction wave_step(const SimulationState& state, const TimeScheme& scheme, double t_next,
                         StepReport& report) const;

    /// Semi-implicit heat update for theta^{n+1} given u^{n+1}.
    FEFunction heat_step(const SimulationState& state, const FEFunction& u_next,
                         const TimeScheme& scheme, double t_next, StepReport& report) const;

    const FESpace& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    const CoupledProblem& problem() const { return problem_; }
    double tau() const { return tau_; }
    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& stiffness() const { return stiffness_; }

    /// Minimum of N1 below which a warning is logged.
    double n1_warning_threshold = 0.1;

private:
    double l2_norm_of(std::span<const double> v) const;

    SpacePtr space_;
    CoupledProblem problem_;
    double tau_;
    FixedPointConfig fp_;
    SolveOptions linear_;
    QuadratureRule rule_;
    Restriction interior_;
    SparseMatrix mass_;
    SparseMatrix stiffness_;
};

enum class InitialProjection { Ritz, Nodal };

std::string to_string(InitialProjection p);
InitialProjection parse_projection(const std::string& s);

struct InitialData {
    ScalarField u0;
    ScalarField u1;
    ScalarField theta0;
    InitialProjection projection = InitialProjection::Ritz;
};

struct SimulationConfig {
    SchemeKind scheme = SchemeKind::Euler;
    double tau = 1.0 / 128.0;
    std::size_t num_steps = 128;
    FixedPointConfig fixed_point;
    SolveOptions linear;
};

struct SimulationResult {
    SimulationState state;
    std::vector<StepReport> reports;
};

/// Number of steps N with N * tau = final_time; throws when final_time is not
/// an integer multiple of tau (relative slack 1e-9).
std::size_t steps_for(double final_time, double tau);

/// Projects the initial data: u^0 = P u0, theta^0 = P theta0, and the ghost
/// level u^{-1} = u^0 - tau P u1 so the first backward difference reproduces u1.
SimulationState initial_state(const SpacePtr& space, const InitialData& data, double tau);

/// Advances wave then heat for config.num_steps steps. BDF2 runs its first step
/// with Euler weights. `on_step` sees the state after every completed step.
/// Step failures are rethrown as StepFailure carrying the failing index.
SimulationResult run_simulation(const SpacePtr& space, const InitialData& data,
                                const CoupledProblem& problem, const SimulationConfig& config,
                                const std::function<void(const SimulationState&)>& on_step = {});

}  // namespace thermofem

#include "thermofem/mms.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "thermofem/errors.hpp"
#include "thermofem/fem.hpp"
#include "thermofem/mesh.hpp"

namespace thermofem {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double four_pi = 4.0 * std::numbers::pi;

}  // namespace

double ManufacturedPair::u(const Point& x, double t) const {
    return a1 * std::sin(two_pi * x.x) * std::sin(two_pi * x.y) * std::exp(lambda1 * t);
}
double ManufacturedPair::u_t(const Point& x, double t) const { return lambda1 * u(x, t); }
double ManufacturedPair::u_tt(const Point& x, double t) const { return lambda1 * lambda1 * u(x, t); }

Vec2 ManufacturedPair::grad_u(const Point& x, double t) const {
    const double s = a1 * two_pi * std::exp(lambda1 * t);
    return {s * std::cos(two_pi * x.x) * std::sin(two_pi * x.y),
            s * std::sin(two_pi * x.x) * std::cos(two_pi * x.y)};
}

Vec2 ManufacturedPair::grad_u_t(const Point& x, double t) const {
    const Vec2 g = grad_u(x, t);
    return {lambda1 * g[0], lambda1 * g[1]};
}

double ManufacturedPair::lap_u(const Point& x, double t) const { return -2.0 * two_pi * two_pi * u(x, t); }
double ManufacturedPair::lap_u_t(const Point& x, double t) const { return lambda1 * lap_u(x, t); }

double ManufacturedPair::theta(const Point& x, double t) const {
    return a2 * std::sin(four_pi * x.x) * std::sin(four_pi * x.y) * std::exp(-lambda2 * t);
}
double ManufacturedPair::theta_t(const Point& x, double t) const { return -lambda2 * theta(x, t); }

Vec2 ManufacturedPair::grad_theta(const Point& x, double t) const {
    const double s = a2 * four_pi * std::exp(-lambda2 * t);
    return {s * std::cos(four_pi * x.x) * std::sin(four_pi * x.y),
            s * std::sin(four_pi * x.x) * std::cos(four_pi * x.y)};
}

Vec2 ManufacturedPair::grad_theta_t(const Point& x, double t) const {
    const Vec2 g = grad_theta(x, t);
    return {-lambda2 * g[0], -lambda2 * g[1]};
}

double ManufacturedPair::lap_theta(const Point& x, double t) const {
    return -2.0 * four_pi * four_pi * theta(x, t);
}

ScalarField ManufacturedPair::u_field() const {
    const ManufacturedPair p = *this;
    return {[p](const Point& x, double t) { return p.u(x, t); },
            [p](const Point& x, double t) { return p.grad_u(x, t); }};
}

ScalarField ManufacturedPair::u_t_field() const {
    const ManufacturedPair p = *this;
    return {[p](const Point& x, double t) { return p.u_t(x, t); },
            [p](const Point& x, double t) { return p.grad_u_t(x, t); }};
}

ScalarField ManufacturedPair::theta_field() const {
    const ManufacturedPair p = *this;
    return {[p](const Point& x, double t) { return p.theta(x, t); },
            [p](const Point& x, double t) { return p.grad_theta(x, t); }};
}

ScalarField ManufacturedPair::theta_t_field() const {
    const ManufacturedPair p = *this;
    return {[p](const Point& x, double t) { return p.theta_t(x, t); },
            [p](const Point& x, double t) { return p.grad_theta_t(x, t); }};
}

double mms_wave_source(const ManufacturedPair& pair, const EquationVariant& variant,
                       const AcousticModel& model, const Point& x, double t) {
    const double th = pair.theta(x, t);
    const double u = pair.u(x, t);
    const double ut = pair.u_t(x, t);
    const double utt = pair.u_tt(x, t);
    const auto k = active_k(variant, model, th);
    const Vec2 gu = pair.grad_u(x, t);
    const Vec2 gut = pair.grad_u_t(x, t);
    const double nonlinear = 2.0 * k.k_w * (u * utt + ut * ut) + 2.0 * k.k_k * ut * utt +
                             2.0 * variant.gradient_coupling() * (gu[0] * gut[0] + gu[1] * gut[1]);
    return utt - q_of_theta(model, th) * pair.lap_u(x, t) -
           beta_of_theta(model, th) * pair.lap_u_t(x, t) + nonlinear;
}

double mms_heat_source(const ManufacturedPair& pair, const EquationVariant& variant,
                       const AcousticModel& model, const HeatParams& heat, const Point& x,
                       double t) {
    const double th = pair.theta(x, t);
    return pair.theta_t(x, t) - heat.kappa * pair.lap_theta(x, t) + heat.nu * th -
           absorbed_energy(variant, model, pair.u(x, t), pair.u_t(x, t), th);
}

CoupledProblem mms_problem(const ManufacturedPair& pair, const EquationVariant& variant,
                           const AcousticModel& model, const HeatParams& heat) {
    CoupledProblem p;
    p.variant = variant;
    p.model = model;
    p.heat = heat;
    p.wave_source = [=](const Point& x, double t) {
        return mms_wave_source(pair, variant, model, x, t);
    };
    p.heat_source = [=](const Point& x, double t) {
        return mms_heat_source(pair, variant, model, heat, x, t);
    };
    return p;
}

TotalError total_error(const SimulationState& state, const ManufacturedPair& pair, double tau,
                       int quad_degree) {
    if (state.step == 0) throw InvalidParameter("total_error needs at least one completed step");
    const auto& scheme = state.last_scheme;
    const SpacePtr& space = state.u[0].space;
    const double t = state.time;
    const FEFunction du(space, discrete_rate(scheme, tau, state.u[0].coefficients,
                                              state.u[1].coefficients, state.u[2].coefficients));
    const FEFunction dth(space, discrete_rate(scheme, tau, state.theta[0].coefficients,
                                               state.theta[1].coefficients,
                                               state.theta[2].coefficients));
    const auto e_du = error_norms(du, pair.u_t_field(), t, quad_degree);
    const auto e_dth = error_norms(dth, pair.theta_t_field(), t, quad_degree);
    const auto e_th = error_norms(state.theta[0], pair.theta_field(), t, quad_degree);
    const auto e_u = error_norms(state.u[0], pair.u_field(), t, quad_degree);
    return {e_du.h1_seminorm + e_dth.l2 + e_th.h1_seminorm, e_u.l2 + e_th.l2};
}

void ConvergenceConfig::validate() const {
    if (mesh_sizes.size() < 3)
        throw ConfigError("mesh_sizes needs at least 3 entries to estimate rates, got " +
                          std::to_string(mesh_sizes.size()));
    for (std::size_t i = 0; i < mesh_sizes.size(); ++i) {
        if (mesh_sizes[i] == 0) throw ConfigError("mesh_sizes entries must be positive");
        if (i > 0 && mesh_sizes[i] <= mesh_sizes[i - 1])
            throw ConfigError("mesh_sizes must be strictly increasing");
    }
    if (degree < 1 || degree > 3) throw ConfigError("degree must be 1, 2 or 3");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(final_time > 0.0)) throw ConfigError("final_time must be positive");
    try {
        steps_for(final_time, tau);
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
    if (!(fixed_point.tol > 0.0)) throw ConfigError("fixed_point.tol must be positive");
    if (fixed_point.max_iter == 0) throw ConfigError("fixed_point.max_iter must be positive");
    if (!(heat.kappa > 0.0) || heat.nu < 0.0) throw ConfigError("need kappa > 0 and nu >= 0");
    if (model.speed.coefficients.empty()) throw ConfigError("speed-of-sound law is empty");
    if (!(model.frequency > 0.0)) throw ConfigError("frequency must be positive");
    if (!(model.density > 0.0)) throw ConfigError("density must be positive");
    if (jobs == 0) throw ConfigError("jobs must be at least 1");
}

std::vector<double> successive_rates(const std::vector<double>& h, const std::vector<double>& e) {
    if (h.size() != e.size()) throw InvalidParameter("successive_rates: size mismatch");
    std::vector<double> r;
    for (std::size_t i = 0; i + 1 < h.size(); ++i)
        r.push_back(std::log(e[i] / e[i + 1]) / std::log(h[i] / h[i + 1]));
    return r;
}

ObservedRate observed_rate(const std::vector<double>& rates) {
    if (rates.empty()) throw InvalidParameter("observed_rate: no rates");
    for (std::size_t i = 1; i < rates.size(); ++i)
        if (rates[i - 1] - rates[i] > 0.5) return {rates[i - 1], i - 1, true, i};
    return {rates.back(), rates.size() - 1, false, 0};
}

ErrorEntry run_mms_case(const ConvergenceConfig& config, std::size_t n) {
    auto mesh = std::make_shared<const Mesh>(unit_square_mesh(n));
    const SpacePtr space = build_space(mesh, config.degree);
    const auto& pair = config.pair;
    const InitialData data{pair.u_field(), pair.u_t_field(), pair.theta_field(), config.projection};
    SimulationConfig sim;
    sim.scheme = config.scheme;
    sim.tau = config.tau;
    sim.num_steps = steps_for(config.final_time, config.tau);
    sim.fixed_point = config.fixed_point;
    sim.linear = config.linear;
    const auto result = run_simulation(
        space, data, mms_problem(pair, config.variant, config.model, config.heat), sim);
    const auto err = total_error(result.state, pair, config.tau);
    ErrorEntry e;
    e.n = n;
    e.h = mesh->h_max();
    e.e_tau = err.e_tau;
    e.l2 = err.l2;
    for (const auto& r : result.reports) e.max_iterations = std::max(e.max_iterations, r.iterations);
    return e;
}

ErrorReport convergence_study(const ConvergenceConfig& config, ErrorReport* partial) {
    config.validate();
    const std::size_t count = config.mesh_sizes.size();
    std::vector<std::optional<ErrorEntry>> slots(count);
    std::vector<std::exception_ptr> failures(count);

    const auto work = [&](std::size_t i) {
        try {
            slots[i] = run_mms_case(config, config.mesh_sizes[i]);
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };
    const std::size_t jobs = std::min(config.jobs, count);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            work(i);
            if (failures[i]) break;
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) work(i);
            });
        for (auto& th : pool) th.join();
    }

    ErrorReport report;
    for (auto& s : slots)
        if (s) report.entries.push_back(*s);
    std::vector<double> h, e, l2;
    for (const auto& en : report.entries) {
        h.push_back(en.h);
        e.push_back(en.e_tau);
        l2.push_back(en.l2);
    }
    report.rates_e = successive_rates(h, e);
    report.rates_l2 = successive_rates(h, l2);
    if (partial) *partial = report;
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    return report;
}

void write_error_csv(std::ostream& out, const ErrorReport& report) {
    out << "h,E_tau,L2_error,rate_E,rate_L2\n" << std::setprecision(17);
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const auto& e = report.entries[i];
        out << e.h << ',' << e.e_tau << ',' << e.l2 << ',';
        if (i > 0 && i - 1 < report.rates_e.size())
            out << report.rates_e[i - 1] << ',' << report.rates_l2[i - 1];
        else
            out << ',';
        out << '\n';
    }
}

void write_plot_data(std::ostream& out, const ErrorReport& report) {
    out << "# log10_h log10_E_tau log10_L2\n" << std::setprecision(17);
    for (const auto& e : report.entries)
        out << std::log10(e.h) << ' ' << std::log10(e.e_tau) << ' ' << std::log10(e.l2) << '\n';
}

}  // namespace thermofem

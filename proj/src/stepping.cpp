#include "thermofem/stepping.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <ostream>

#include "thermofem/errors.hpp"

namespace thermofem {

std::string to_string(SchemeKind k) { return k == SchemeKind::BDF2 ? "bdf2" : "euler"; }

SchemeKind parse_scheme(const std::string& s) {
    if (s == "euler") return SchemeKind::Euler;
    if (s == "bdf2") return SchemeKind::BDF2;
    throw InvalidParameter("unknown time scheme '" + s + "'");
}

std::string to_string(InitialProjection p) { return p == InitialProjection::Ritz ? "ritz" : "nodal"; }

InitialProjection parse_projection(const std::string& s) {
    if (s == "ritz") return InitialProjection::Ritz;
    if (s == "nodal") return InitialProjection::Nodal;
    throw InvalidParameter("unknown initial projection '" + s + "'");
}

HistoryCombos history_combos(const TimeScheme& scheme,
                             std::span<const std::span<const double>> history) {
    if (history.size() < scheme.history_depth)
        throw InvalidParameter("history_combos: " + to_string(scheme.kind) + " needs " +
                               std::to_string(scheme.history_depth) + " history levels, got " +
                               std::to_string(history.size()));
    const std::size_t n = history[0].size();
    for (std::size_t k = 1; k < scheme.history_depth; ++k)
        if (history[k].size() != n) throw InvalidParameter("history_combos: size mismatch");
    HistoryCombos c{Vector(n), Vector(n)};
    const auto& a0 = history[0];
    const auto& a1 = history[1];
    if (scheme.kind == SchemeKind::Euler) {
        for (std::size_t i = 0; i < n; ++i) {
            c.delta1[i] = a0[i];
            c.delta2[i] = 2.0 * a0[i] - a1[i];
        }
    } else {
        const auto& a2 = history[2];
        for (std::size_t i = 0; i < n; ++i) {
            c.delta1[i] = 2.0 * a0[i] - 0.5 * a1[i];
            c.delta2[i] = 5.0 * a0[i] - 4.0 * a1[i] + a2[i];
        }
    }
    return c;
}

Vector history_delta1(const TimeScheme& scheme, std::span<const double> an,
                      std::span<const double> anm1) {
    Vector d(an.begin(), an.end());
    if (scheme.kind == SchemeKind::BDF2) {
        if (anm1.size() != an.size()) throw InvalidParameter("history_delta1: BDF2 needs a^{n-1}");
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = 2.0 * an[i] - 0.5 * anm1[i];
    }
    return d;
}

Vector discrete_rate(const TimeScheme& scheme, double tau, std::span<const double> anp1,
                     std::span<const double> an, std::span<const double> anm1) {
    Vector r = history_delta1(scheme, an, anm1);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = (scheme.sigma1 * anp1[i] - r[i]) / tau;
    return r;
}

void write_step_reports_csv(std::ostream& out, std::span<const StepReport> reports) {
    out << "step,scheme,iterations,final_increment,n1_min,wave_solver_iterations,"
           "wave_residual,heat_solver_iterations,heat_residual\n";
    out << std::setprecision(17);
    for (const auto& r : reports) {
        std::size_t wave_its = 0;
        double wave_res = 0.0;
        for (const auto& s : r.wave_solves) {
            wave_its += s.iterations;
            wave_res = std::max(wave_res, s.relative_residual);
        }
        out << r.step << ',' << to_string(r.scheme) << ',' << r.iterations << ','
            << r.final_increment << ',' << r.n1_min << ',' << wave_its << ',' << wave_res << ','
            << r.heat_solve.iterations << ',' << r.heat_solve.relative_residual << '\n';
    }
}

CoupledStepper::CoupledStepper(SpacePtr space, CoupledProblem problem, double tau,
                               FixedPointConfig fp, SolveOptions linear)
    : space_(std::move(space)),
      problem_(std::move(problem)),
      tau_(tau),
      fp_(fp),
      linear_(linear),
      rule_(triangle_rule(assembly_quadrature_degree(*space_))),
      interior_(dirichlet_restriction(*space_)),
      mass_(assemble_mass(*space_)),
      stiffness_(assemble_stiffness(*space_)) {
    if (!(tau > 0.0)) throw InvalidParameter("time step must be positive");
    if (!(fp_.tol > 0.0)) throw InvalidParameter("fixed-point tolerance must be positive");
    if (fp_.max_iter == 0) throw InvalidParameter("fixed-point max_iter must be positive");
    if (!(problem_.heat.kappa > 0.0) || problem_.heat.nu < 0.0)
        throw InvalidParameter("heat parameters need kappa > 0 and nu >= 0");
}

double CoupledStepper::l2_norm_of(std::span<const double> v) const {
    const Vector mv = matvec(mass_, v);
    return std::sqrt(std::max(0.0, dot(v, mv)));
}

namespace {

// Temperature-dependent data frozen at theta^n, tabulated per quadrature point.
struct FrozenCoefficients {
    std::vector<double> theta;
    std::vector<double> q, beta, k_w, k_k;
    std::vector<Vec2> grad_q, grad_beta;
};

FrozenCoefficients freeze(const FESpace& space, const QuadratureRule& rule,
                          std::span<const double> theta, const CoupledProblem& p) {
    const std::size_t nq = rule.size();
    const std::size_t total = space.num_cells() * nq;
    FrozenCoefficients f;
    f.theta.resize(total);
    f.q.resize(total);
    f.beta.resize(total);
    f.k_w.resize(total);
    f.k_k.resize(total);
    f.grad_q.resize(total);
    f.grad_beta.resize(total);
    CellValues cv(space, rule);
    for (std::size_t c = 0; c < space.num_cells(); ++c) {
        cv.reinit(c);
        for (std::size_t q = 0; q < nq; ++q) {
            const std::size_t k = c * nq + q;
            const double th = cv.value(theta, q);
            const Vec2 g = cv.gradient(theta, q);
            f.theta[k] = th;
            f.q[k] = q_of_theta(p.model, th);
            f.beta[k] = beta_of_theta(p.model, th);
            const double dq = dq_dtheta(p.model, th);
            const double db = dbeta_dtheta(p.model, th);
            f.grad_q[k] = {dq * g[0], dq * g[1]};
            f.grad_beta[k] = {db * g[0], db * g[1]};
            if (!p.linear_wave) {
                const auto kk = active_k(p.variant, p.model, th);
                f.k_w[k] = kk.k_w;
                f.k_k[k] = kk.k_k;
            }
        }
    }
    return f;
}

}  // namespace

FEFunction CoupledStepper::wave_step(const SimulationState& state, const TimeScheme& scheme,
                                     double t_next, StepReport& report) const {
    const FESpace& space = *space_;
    const std::size_t ndofs = space.num_dofs();
    const std::size_t nq = rule_.size();
    const int qdeg = rule_.degree;
    const double tau = tau_;

    std::array<std::span<const double>, 3> hist{state.u[0].coefficients, state.u[1].coefficients,
                                                 state.u[2].coefficients};
    const auto combos = history_combos(scheme, std::span(hist.data(), scheme.history_depth));
    const auto frozen = freeze(space, rule_, state.theta[0].coefficients, problem_);
    const double ell = problem_.linear_wave ? 0.0 : problem_.variant.gradient_coupling();
    const bool linear =
        fp_.detect_linear && ell == 0.0 &&
        std::all_of(frozen.k_w.begin(), frozen.k_w.end(), [](double v) { return v == 0.0; }) &&
        std::all_of(frozen.k_k.begin(), frozen.k_k.end(), [](double v) { return v == 0.0; });

    const auto at = [nq](const CellValues& cv, std::size_t q) { return cv.cell() * nq + q; };
    const SparseMatrix a_q = assemble_weighted_stiffness(
        space, [&](const CellValues& cv, std::size_t q) { return frozen.q[at(cv, q)]; },
        [&](const CellValues& cv, std::size_t q) { return frozen.grad_q[at(cv, q)]; }, qdeg);
    const SparseMatrix a_beta = assemble_weighted_stiffness(
        space, [&](const CellValues& cv, std::size_t q) { return frozen.beta[at(cv, q)]; },
        [&](const CellValues& cv, std::size_t q) { return frozen.grad_beta[at(cv, q)]; }, qdeg);

    // Iteration-independent parts: tau^2 a(u, q phi) + tau sigma1 a(u, beta phi)
    // and tau a(delta1 u^n, beta phi) + tau^2 (f, phi).
    SparseMatrix fixed_lhs = a_q;
    fixed_lhs.axpby(tau * tau, tau * scheme.sigma1, a_beta);
    Vector fixed_rhs = matvec(a_beta, combos.delta1);
    for (double& v : fixed_rhs) v *= tau;
    if (problem_.wave_source) {
        const Vector f = assemble_load(
            space,
            [&](const CellValues& cv, std::size_t q) { return problem_.wave_source(cv.point(q), t_next); },
            qdeg);
        for (std::size_t i = 0; i < ndofs; ++i) fixed_rhs[i] += tau * tau * f[i];
    }

    Vector ui = state.u[0].coefficients;
    Vector ut(ndofs);
    report.increments.clear();
    report.wave_solves.clear();
    report.n1_min = std::numeric_limits<double>::infinity();
    double increment = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= fp_.max_iter; ++it) {
        for (std::size_t i = 0; i < ndofs; ++i) ut[i] = (scheme.sigma1 * ui[i] - combos.delta1[i]) / tau;

        double n1_min = std::numeric_limits<double>::infinity();
        const SparseMatrix m_n1 = assemble_mass(
            space,
            [&](const CellValues& cv, std::size_t q) {
                const std::size_t k = at(cv, q);
                const double n1 = 1.0 + 2.0 * frozen.k_w[k] * cv.value(ui, q) +
                                  2.0 * frozen.k_k[k] * cv.value(ut, q);
                n1_min = std::min(n1_min, n1);
                return n1;
            },
            qdeg);
        report.n1_min = std::min(report.n1_min, n1_min);
        if (!(n1_min > 0.0))
            throw ModelDegeneracy("N1 coefficient reached " + std::to_string(n1_min) +
                                  " at a quadrature point");

        Vector rhs = matvec(m_n1, combos.delta2);
        for (std::size_t i = 0; i < ndofs; ++i) rhs[i] += fixed_rhs[i];
        if (!linear) {
            const Vector n2 = assemble_load(
                space,
                [&](const CellValues& cv, std::size_t q) {
                    const std::size_t k = at(cv, q);
                    double v = 0.0;
                    if (frozen.k_w[k] != 0.0) {
                        const double utq = cv.value(ut, q);
                        v += 2.0 * frozen.k_w[k] * utq * utq;
                    }
                    if (ell != 0.0) {
                        const Vec2 gu = cv.gradient(ui, q);
                        const Vec2 gut = cv.gradient(ut, q);
                        v += 2.0 * ell * (gu[0] * gut[0] + gu[1] * gut[1]);
                    }
                    return v;
                },
                qdeg);
            for (std::size_t i = 0; i < ndofs; ++i) rhs[i] -= tau * tau * n2[i];
        }

        SparseMatrix lhs = m_n1;
        lhs.axpby(scheme.sigma2, 1.0, fixed_lhs);
        SolveReport rep;
        Vector next = solve_dirichlet(interior_, lhs, rhs, linear_, ui, &rep);
        report.wave_solves.push_back(rep);

        Vector diff(ndofs);
        for (std::size_t i = 0; i < ndofs; ++i) diff[i] = next[i] - ui[i];
        const double num = l2_norm_of(diff);
        const double den = l2_norm_of(next);
        increment = den > 0.0 ? num / den : num;
        report.increments.push_back(increment);
        ui = std::move(next);
        report.iterations = it;
        report.final_increment = increment;
        if (linear) {
            report.final_increment = 0.0;
            break;
        }
        if (increment < fp_.tol) break;
        if (it == fp_.max_iter)
            throw FixedPointDivergence("fixed-point iteration did not converge in " +
                                           std::to_string(fp_.max_iter) + " iterations",
                                       increment);
    }
    if (report.n1_min < n1_warning_threshold)
        std::cerr << "warning: N1 minimum " << report.n1_min << " below "
                  << n1_warning_threshold << " at step " << report.step << '\n';
    return FEFunction(space_, std::move(ui));
}

FEFunction CoupledStepper::heat_step(const SimulationState& state, const FEFunction& u_next,
                                     const TimeScheme& scheme, double t_next,
                                     StepReport& report) const {
    const FESpace& space = *space_;
    const std::size_t ndofs = space.num_dofs();
    const double tau = tau_;
    const int qdeg = rule_.degree;

    const Vector ut = discrete_rate(scheme, tau, u_next.coefficients, state.u[0].coefficients,
                                    state.u[1].coefficients);
    const Vector d1 =
        history_delta1(scheme, state.theta[0].coefficients, state.theta[1].coefficients);
    const auto& theta_n = state.theta[0].coefficients;

    Vector rhs = matvec(mass_, d1);
    if (!problem_.disable_absorption) {
        const Vector q = assemble_load(
            space,
            [&](const CellValues& cv, std::size_t qp) {
                const double u = cv.value(u_next.coefficients, qp);
                const double v = cv.value(ut, qp);
                if (u == 0.0 && v == 0.0) return 0.0;
                return absorbed_energy(problem_.variant, problem_.model, u, v,
                                       cv.value(theta_n, qp));
            },
            qdeg);
        for (std::size_t i = 0; i < ndofs; ++i) rhs[i] += tau * q[i];
    }
    if (problem_.heat_source) {
        const Vector g = assemble_load(
            space,
            [&](const CellValues& cv, std::size_t qp) { return problem_.heat_source(cv.point(qp), t_next); },
            qdeg);
        for (std::size_t i = 0; i < ndofs; ++i) rhs[i] += tau * g[i];
    }
    SparseMatrix lhs = mass_;
    lhs.axpby(scheme.sigma1 + tau * problem_.heat.nu, tau * problem_.heat.kappa, stiffness_);
    SolveOptions opts = linear_;
    if (opts.method == SolverMethod::Auto) opts.method = SolverMethod::ConjugateGradient;
    SolveReport rep;
    Vector theta = solve_dirichlet(interior_, lhs, rhs, opts, theta_n, &rep);
    report.heat_solve = rep;
    return FEFunction(space_, std::move(theta));
}

std::size_t steps_for(double final_time, double tau) {
    if (!(tau > 0.0) || !(final_time >= 0.0))
        throw InvalidParameter("need tau > 0 and final_time >= 0");
    const double ratio = final_time / tau;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        throw InvalidParameter("final time is not an integer multiple of tau");
    return static_cast<std::size_t>(rounded);
}

namespace {

FEFunction project(const SpacePtr& space, const ScalarField& f, InitialProjection p) {
    FEFunction out = p == InitialProjection::Ritz ? ritz_projection(space, f)
                                                  : nodal_interpolate(space, f);
    for (auto d : space->boundary_dofs()) out.coefficients[d] = 0.0;
    return out;
}

}  // namespace

SimulationState initial_state(const SpacePtr& space, const InitialData& data, double tau) {
    SimulationState s;
    const FEFunction u0 = project(space, data.u0, data.projection);
    const FEFunction u1 = project(space, data.u1, data.projection);
    const FEFunction th0 = project(space, data.theta0, data.projection);
    FEFunction ghost(space);
    for (std::size_t i = 0; i < ghost.coefficients.size(); ++i)
        ghost.coefficients[i] = u0.coefficients[i] - tau * u1.coefficients[i];
    s.u = {u0, ghost, ghost};
    s.theta = {th0, th0, th0};
    return s;
}

SimulationResult run_simulation(const SpacePtr& space, const InitialData& data,
                                const CoupledProblem& problem, const SimulationConfig& config,
                                const std::function<void(const SimulationState&)>& on_step) {
    const CoupledStepper stepper(space, problem, config.tau, config.fixed_point, config.linear);
    SimulationResult result;
    result.state = initial_state(space, data, config.tau);
    result.reports.reserve(config.num_steps);
    auto& s = result.state;
    for (std::size_t n = 0; n < config.num_steps; ++n) {
        const TimeScheme scheme = (config.scheme == SchemeKind::BDF2 && n >= 1)
                                      ? TimeScheme::bdf2()
                                      : TimeScheme::euler();
        const double t_next = static_cast<double>(n + 1) * config.tau;
        StepReport report;
        report.step = n + 1;
        report.scheme = scheme.kind;
        report.sigma1 = scheme.sigma1;
        report.sigma2 = scheme.sigma2;
        try {
            FEFunction u_next = stepper.wave_step(s, scheme, t_next, report);
            FEFunction th_next = stepper.heat_step(s, u_next, scheme, t_next, report);
            s.u = {std::move(u_next), std::move(s.u[0]), std::move(s.u[1])};
            s.theta = {std::move(th_next), std::move(s.theta[0]), std::move(s.theta[1])};
        } catch (const StepFailure&) {
            throw;
        } catch (const Error& e) {
            throw StepFailure(e.what(), n + 1);
        }
        s.step = n + 1;
        s.time = t_next;
        s.last_scheme = scheme;
        result.reports.push_back(std::move(report));
        if (on_step) on_step(s);
    }
    return result;
}

}  // namespace thermofem

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "thermofem/errors.hpp"
#include "thermofem/fem.hpp"
#include "thermofem/mms.hpp"
#include "thermofem/quadrature.hpp"
#include "thermofem/stepping.hpp"

using namespace thermofem;
using namespace testing_support;

namespace {

std::vector<double> levels(double (*a)(double), double tau, int count) {
    // a(t_{n+1}), a(t_n), ... with t_{n+1} = 1.
    std::vector<double> v;
    for (int k = 0; k < count; ++k) v.push_back(a(1.0 - k * tau));
    return v;
}

struct RateCase {
    double (*a)(double);
    double d1;
    double d2;
};

double norm_m(const SparseMatrix& m, std::span<const double> v) { return std::sqrt(dot(v, matvec(m, v))); }

CoupledProblem quiet_problem() {
    CoupledProblem p;
    p.linear_wave = true;
    p.disable_absorption = true;
    return p;
}

/// Independent load oracle: integral of f * phi_i with a degree-`deg` rule and an explicit affine map.
Vector load_oracle(const FESpace& space, const std::function<double(const Point&)>& f, int deg) {
    const auto rule = triangle_rule(deg);
    const Mesh& m = space.mesh();
    const auto& el = space.element();
    Vector b(space.num_dofs(), 0.0);
    std::vector<double> phi(el.num_nodes());
    for (std::size_t c = 0; c < m.num_triangles(); ++c) {
        const auto& t = m.triangles()[c];
        const Point& p0 = m.vertices()[t[0]];
        const Point& p1 = m.vertices()[t[1]];
        const Point& p2 = m.vertices()[t[2]];
        const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
        const auto dofs = space.cell_dofs(c);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double xi = rule.points[q][0], eta = rule.points[q][1];
            const Point x{p0.x + (p1.x - p0.x) * xi + (p2.x - p0.x) * eta,
                          p0.y + (p1.y - p0.y) * xi + (p2.y - p0.y) * eta};
            el.values(xi, eta, phi);
            const double w = 0.5 * std::abs(det) * rule.weights[q] * f(x);
            for (std::size_t i = 0; i < phi.size(); ++i) b[dofs[i]] += w * phi[i];
        }
    }
    return b;
}

SimulationState state_from(const SpacePtr&, const FEFunction& u0, const FEFunction& u1,
                           const FEFunction& th0) {
    SimulationState st;
    st.u = {u0, u1, u1};
    st.theta = {th0, th0, th0};
    return st;
}

}  // namespace

TEST(HistoryCombos, ExactOnPolynomials) {
    const double tau = 0.1;
    const RateCase cases[] = {
        {[](double) { return 3.0; }, 0.0, 0.0},
        {[](double t) { return 2.0 * t - 1.0; }, 2.0, 0.0},
        {[](double t) { return t * t; }, 2.0, 2.0},
    };
    for (const auto& c : cases) {
        for (auto scheme : {TimeScheme::euler(), TimeScheme::bdf2()}) {
            const auto a = levels(c.a, tau, 4);
            const std::vector<double> an{a[1]}, anm1{a[2]}, anm2{a[3]};
            const std::span<const double> hist[] = {an, anm1, anm2};
            const auto h = history_combos(scheme, std::span<const std::span<const double>>(hist, 3));
            const double rate = (scheme.sigma1 * a[0] - h.delta1[0]) / tau;
            const double acc = (scheme.sigma2 * a[0] - h.delta2[0]) / (tau * tau);
            const bool quadratic = c.a(2.0) - 2 * c.a(1.0) + c.a(0.0) != 0.0;
            if (scheme.kind == SchemeKind::BDF2 || !quadratic) EXPECT_NEAR(rate, c.d1, 1e-12);
            EXPECT_NEAR(acc, c.d2, 1e-10);
            const std::vector<double> anp1{a[0]};
            const auto r = discrete_rate(scheme, tau, anp1, an, anm1);
            EXPECT_NEAR(r[0], rate, 1e-12);
            const auto d1 = history_delta1(scheme, an, anm1);
            EXPECT_NEAR(d1[0], h.delta1[0], 1e-14);
        }
    }
    // BDF2 second difference is exact for cubics: a = t^3, a'' = 6 at t = 1.
    const auto a = levels([](double t) { return t * t * t; }, tau, 4);
    const std::vector<double> an{a[1]}, anm1{a[2]}, anm2{a[3]};
    const std::span<const double> hist[] = {an, anm1, anm2};
    const auto h = history_combos(TimeScheme::bdf2(), std::span<const std::span<const double>>(hist, 3));
    EXPECT_NEAR((2.0 * a[0] - h.delta2[0]) / (tau * tau), 6.0, 1e-9);
}

TEST(HistoryCombos, InsufficientHistoryThrows) {
    const std::vector<double> an{1.0}, anm1{1.0};
    const std::span<const double> two[] = {an, anm1};
    EXPECT_THROW(history_combos(TimeScheme::bdf2(), std::span<const std::span<const double>>(two, 2)),
                 InvalidParameter);
    EXPECT_THROW(history_combos(TimeScheme::euler(), std::span<const std::span<const double>>(two, 1)),
                 InvalidParameter);
    EXPECT_NO_THROW(history_combos(TimeScheme::euler(), std::span<const std::span<const double>>(two, 2)));
}

TEST(SchemeNames, RoundTrip) {
    for (auto k : {SchemeKind::Euler, SchemeKind::BDF2}) EXPECT_EQ(parse_scheme(to_string(k)), k);
    for (auto p : {InitialProjection::Ritz, InitialProjection::Nodal})
        EXPECT_EQ(parse_projection(to_string(p)), p);
    EXPECT_THROW(parse_scheme("rk4"), Error);
}

TEST(StepsFor, IntegerMultiples) {
    EXPECT_EQ(steps_for(1.0, 1.0 / 128.0), 128u);
    EXPECT_EQ(steps_for(4e-5, 1e-7), 400u);
    EXPECT_THROW(steps_for(1.0, 0.3), InvalidParameter);
    EXPECT_THROW(steps_for(1.0, 0.0), InvalidParameter);
}

TEST(CoupledStepper, RejectsBadParameters) {
    const auto s = build_space(square(2), 1);
    EXPECT_THROW(CoupledStepper(s, {}, 0.0), InvalidParameter);
    EXPECT_THROW(CoupledStepper(s, {}, -1.0), InvalidParameter);
    FixedPointConfig fp;
    fp.max_iter = 0;
    EXPECT_THROW(CoupledStepper(s, {}, 0.1, fp), InvalidParameter);
}

TEST(CoupledStepper, ZeroStateStaysZero) {
    const auto s = build_space(square(4), 2);
    for (auto variant : {EquationVariant::westervelt(), EquationVariant::kuznetsov()}) {
        CoupledProblem p;
        p.variant = variant;
        const CoupledStepper st(s, p, 1e-3);
        const auto state = state_from(s, FEFunction(s), FEFunction(s), FEFunction(s));
        StepReport r;
        const auto u = st.wave_step(state, TimeScheme::euler(), 1e-3, r);
        for (double v : u.coefficients) EXPECT_EQ(v, 0.0);
        EXPECT_LE(r.iterations, 2u);
        const auto th = st.heat_step(state, u, TimeScheme::euler(), 1e-3, r);
        for (double v : th.coefficients) EXPECT_EQ(v, 0.0);
    }
}

TEST(CoupledStepper, LinearRegimeTakesOneIteration) {
    const auto s = build_space(square(6), 1);
    const CoupledStepper st(s, quiet_problem(), 1e-3);
    const auto u0 = random_conforming(s, 5);
    const auto state = state_from(s, u0, u0, FEFunction(s));
    StepReport r;
    st.wave_step(state, TimeScheme::euler(), 1e-3, r);
    EXPECT_EQ(r.iterations, 1u);
    EXPECT_EQ(r.wave_solves.size(), 1u);

    FixedPointConfig fp;
    fp.detect_linear = false;
    const CoupledStepper full(s, quiet_problem(), 1e-3, fp);
    StepReport r2;
    full.wave_step(state, TimeScheme::euler(), 1e-3, r2);
    EXPECT_EQ(r2.iterations, 2u);
}

TEST(CoupledStepper, DiscreteEnergyDecaysWithoutSources) {
    const auto s = build_space(square(8), 1);
    const double tau = 1e-3;
    const CoupledStepper st(s, quiet_problem(), tau);
    const double q = q_of_theta(AcousticModel{}, 0.0);
    InitialData data{sine_field(M_PI), ScalarField::constant(0.0), ScalarField::constant(0.0)};
    // sin(pi x) sin(pi y) vanishes on the boundary.
    auto state = initial_state(s, data, tau);
    auto energy = [&](const SimulationState& x) {
        Vector rate(s->num_dofs());
        for (std::size_t i = 0; i < rate.size(); ++i)
            rate[i] = (x.u[0].coefficients[i] - x.u[1].coefficients[i]) / tau;
        const double e_k = dot(rate, matvec(st.mass(), rate));
        const double e_p = q * dot(x.u[0].coefficients, matvec(st.stiffness(), x.u[0].coefficients));
        return 0.5 * (e_k + e_p);
    };
    double prev = energy(state);
    for (int n = 0; n < 50; ++n) {
        StepReport r;
        const auto u = st.wave_step(state, TimeScheme::euler(), (n + 1) * tau, r);
        const auto th = st.heat_step(state, u, TimeScheme::euler(), (n + 1) * tau, r);
        state.u = {u, state.u[0], state.u[1]};
        state.theta = {th, state.theta[0], state.theta[1]};
        const double e = energy(state);
        EXPECT_LE(e, prev * (1.0 + 1e-12)) << "step " << n;
        prev = e;
    }
    for (double v : state.theta[0].coefficients) EXPECT_EQ(v, 0.0);
}

TEST(CoupledStepper, HeatStepContractsWithoutSources) {
    const auto s = build_space(square(4), 1);
    HeatParams heat{0.3, 2.0};
    CoupledProblem p = quiet_problem();
    p.heat = heat;
    const double tau = 0.05;
    const CoupledStepper st(s, p, tau);
    for (unsigned seed = 0; seed < 100; ++seed) {
        const auto th = random_conforming(s, seed, 10.0);
        const auto state = state_from(s, FEFunction(s), FEFunction(s), th);
        StepReport r;
        const auto next = st.heat_step(state, FEFunction(s), TimeScheme::euler(), tau, r);
        EXPECT_LE(norm_m(st.mass(), next.coefficients),
                  norm_m(st.mass(), th.coefficients) / (1.0 + tau * heat.nu) * (1.0 + 1e-10));
    }
}

TEST(CoupledStepper, HeatStepMatchesDenseOracle) {
    const auto s = build_space(square(3), 1);
    CoupledProblem p;
    p.variant = EquationVariant::kuznetsov();
    p.heat = {0.7, 0.2};
    p.heat_source = [](const Point& x, double t) { return 1.0 + x.x * x.y + t; };
    const double tau = 0.1, t_next = 0.3;
    const CoupledStepper st(s, p, tau);
    const auto u = random_conforming(s, 2, 50.0);
    const auto th = random_conforming(s, 3, 0.5);
    auto state = state_from(s, u, u, th);
    StepReport r;
    // u_next = u^n: the rate vanishes and Q = rho alpha_tilde u^2 / c(theta^n).
    const auto got = st.heat_step(state, u, TimeScheme::euler(), t_next, r);

    const auto uf = fe_field(u), tf = fe_field(th);
    const AcousticModel& m = p.model;
    const auto q_load = load_oracle(
        *s,
        [&](const Point& x) {
            const double uv = uf(x, 0.0);
            return absorbed_energy(p.variant, m, uv, 0.0, tf(x, 0.0));
        },
        12);
    const auto g_load = load_oracle(*s, [&](const Point& x) { return p.heat_source(x, t_next); }, 12);
    const auto mass = assemble_mass(*s).to_dense();
    const auto stiff = assemble_stiffness(*s).to_dense();
    const auto& interior = s->interior_dofs();
    std::vector<Vector> a(interior.size(), Vector(interior.size()));
    Vector b(interior.size(), 0.0);
    for (std::size_t i = 0; i < interior.size(); ++i) {
        const auto gi = interior[i];
        for (std::size_t j = 0; j < interior.size(); ++j) {
            const auto gj = interior[j];
            a[i][j] = (1.0 + tau * p.heat.nu) * mass[gi][gj] + tau * p.heat.kappa * stiff[gi][gj];
        }
        for (std::size_t j = 0; j < s->num_dofs(); ++j) b[i] += mass[gi][j] * th.coefficients[j];
        b[i] += tau * (q_load[gi] + g_load[gi]);
    }
    const auto x = dense_lu_solve(a, b);
    for (std::size_t i = 0; i < interior.size(); ++i)
        EXPECT_NEAR(got.coefficients[interior[i]], x[i], 1e-10 * (std::abs(x[i]) + 1e-3));
    for (auto d : s->boundary_dofs()) EXPECT_EQ(got.coefficients[d], 0.0);
}

TEST(RunSimulation, Bdf2StartsWithEulerWeights) {
    const auto s = build_space(square(4), 1);
    const ManufacturedPair pair;
    const auto problem = mms_problem(pair, EquationVariant::westervelt(), {}, {});
    InitialData data{pair.u_field(), pair.u_t_field(), pair.theta_field()};
    SimulationConfig cfg;
    cfg.scheme = SchemeKind::BDF2;
    cfg.tau = 1.0 / 64;
    cfg.num_steps = 3;
    std::size_t calls = 0;
    const auto res = run_simulation(s, data, problem, cfg, [&](const SimulationState& st) {
        ++calls;
        EXPECT_EQ(st.step, calls);
        EXPECT_NEAR(st.time, calls * cfg.tau, 1e-15);
    });
    EXPECT_EQ(calls, 3u);
    ASSERT_EQ(res.reports.size(), 3u);
    EXPECT_EQ(res.reports[0].scheme, SchemeKind::Euler);
    EXPECT_DOUBLE_EQ(res.reports[0].sigma1, 1.0);
    EXPECT_DOUBLE_EQ(res.reports[0].sigma2, 1.0);
    for (std::size_t k = 1; k < 3; ++k) {
        EXPECT_EQ(res.reports[k].scheme, SchemeKind::BDF2);
        EXPECT_DOUBLE_EQ(res.reports[k].sigma1, 1.5);
        EXPECT_DOUBLE_EQ(res.reports[k].sigma2, 2.0);
    }
    EXPECT_EQ(res.state.last_scheme.kind, SchemeKind::BDF2);
    std::ostringstream csv;
    write_step_reports_csv(csv, res.reports);
    EXPECT_NE(csv.str().find("bdf2"), std::string::npos);
}

TEST(RunSimulation, InitialStateGhostLevel) {
    const auto s = build_space(square(4), 2);
    const ManufacturedPair pair;
    InitialData data{pair.u_field(), pair.u_t_field(), pair.theta_field()};
    const double tau = 0.01;
    const auto st = initial_state(s, data, tau);
    const auto pu1 = ritz_projection(s, pair.u_t_field());
    for (std::size_t i = 0; i < s->num_dofs(); ++i)
        EXPECT_NEAR((st.u[0].coefficients[i] - st.u[1].coefficients[i]) / tau, pu1.coefficients[i], 1e-9);
    for (auto d : s->boundary_dofs()) {
        EXPECT_EQ(st.u[0].coefficients[d], 0.0);
        EXPECT_EQ(st.u[1].coefficients[d], 0.0);
    }
    EXPECT_EQ(st.step, 0u);
    EXPECT_EQ(st.theta[0].coefficients, st.theta[2].coefficients);
}

TEST(RunSimulation, ZeroDataGivesZeroTrajectory) {
    const auto s = build_space(square(4), 2);
    InitialData data{ScalarField::constant(0.0), ScalarField::constant(0.0), ScalarField::constant(0.0)};
    SimulationConfig cfg;
    cfg.scheme = SchemeKind::BDF2;
    cfg.tau = 1e-3;
    cfg.num_steps = 10;
    CoupledProblem p;
    p.variant = EquationVariant::kuznetsov();
    const auto res = run_simulation(s, data, p, cfg);
    for (const auto& f : res.state.u)
        for (double v : f.coefficients) EXPECT_EQ(v, 0.0);
    for (const auto& f : res.state.theta)
        for (double v : f.coefficients) EXPECT_EQ(v, 0.0);
}

TEST(RunSimulation, ManufacturedRegimeFixedPointContracts) {
    const auto s = build_space(square(16), 1);
    const ManufacturedPair pair;
    for (auto variant : {EquationVariant::westervelt(), EquationVariant::kuznetsov()}) {
        const auto problem = mms_problem(pair, variant, {}, {});
        InitialData data{pair.u_field(), pair.u_t_field(), pair.theta_field()};
        SimulationConfig cfg;
        cfg.tau = 1.0 / 128;
        cfg.num_steps = 8;
        const auto res = run_simulation(s, data, problem, cfg);
        for (const auto& r : res.reports) {
            EXPECT_LE(r.iterations, 10u);
            EXPECT_LT(r.final_increment, 1e-10);
            for (std::size_t k = 1; k < r.increments.size(); ++k) EXPECT_LT(r.increments[k], r.increments[k - 1]);
            EXPECT_GT(r.n1_min, 0.0);
        }
    }
}

TEST(RunSimulation, Deterministic) {
    const auto s = build_space(square(8), 2);
    const ManufacturedPair pair;
    const auto problem = mms_problem(pair, EquationVariant::kuznetsov(), {}, {});
    InitialData data{pair.u_field(), pair.u_t_field(), pair.theta_field()};
    SimulationConfig cfg;
    cfg.scheme = SchemeKind::BDF2;
    cfg.tau = 1.0 / 64;
    cfg.num_steps = 6;
    const auto a = run_simulation(s, data, problem, cfg);
    const auto b = run_simulation(s, data, problem, cfg);
    EXPECT_EQ(a.state.u[0].coefficients, b.state.u[0].coefficients);
    EXPECT_EQ(a.state.theta[0].coefficients, b.state.theta[0].coefficients);
}

TEST(RunSimulation, FixedPointDivergenceIsReportedWithStep) {
    const auto s = build_space(square(4), 1);
    const ManufacturedPair pair;
    const auto problem = mms_problem(pair, EquationVariant::westervelt(), {}, {});
    InitialData data{pair.u_field(), pair.u_t_field(), pair.theta_field()};
    SimulationConfig cfg;
    cfg.tau = 1.0 / 64;
    cfg.num_steps = 2;
    cfg.fixed_point.max_iter = 1;
    cfg.fixed_point.tol = 1e-300;
    try {
        run_simulation(s, data, problem, cfg);
        FAIL() << "expected StepFailure";
    } catch (const StepFailure& e) {
        EXPECT_EQ(e.step(), 1u);
    }
}

namespace {

// Self-convergence in time on a fixed mesh: log2 of successive differences.
double temporal_order(SchemeKind scheme) {
    const auto s = build_space(square(6), 2);
    const ManufacturedPair pair;
    const auto problem = mms_problem(pair, EquationVariant::westervelt(), {}, {});
    InitialData data{pair.u_field(), pair.u_t_field(), pair.theta_field()};
    std::vector<FEFunction> finals;
    for (std::size_t n : {16u, 32u, 64u}) {
        SimulationConfig cfg;
        cfg.scheme = scheme;
        cfg.tau = 0.5 / n;
        cfg.num_steps = n;
        finals.push_back(run_simulation(s, data, problem, cfg).state.u[0]);
    }
    auto diff = [&](const FEFunction& a, const FEFunction& b) {
        FEFunction d(s);
        for (std::size_t i = 0; i < d.coefficients.size(); ++i) d.coefficients[i] = a.coefficients[i] - b.coefficients[i];
        return h1_seminorm(d);
    };
    return std::log2(diff(finals[0], finals[1]) / diff(finals[1], finals[2]));
}

}  // namespace

TEST(RunSimulation, TemporalOrderEuler) {
    const double p = temporal_order(SchemeKind::Euler);
    RecordProperty("order", std::to_string(p));
    EXPECT_NEAR(p, 1.0, 0.3);
}

TEST(RunSimulation, TemporalOrderBdf2) {
    const double p = temporal_order(SchemeKind::BDF2);
    RecordProperty("order", std::to_string(p));
    EXPECT_NEAR(p, 2.0, 0.3);
}

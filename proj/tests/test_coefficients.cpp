#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "thermofem/coefficients.hpp"
#include "thermofem/errors.hpp"

using namespace thermofem;

namespace {

double fd(auto f, double x, double h = 1e-4) { return (f(x + h) - f(x - h)) / (2 * h); }

AcousticModel model_with_frequency(double f, SpeedOfSoundLaw law = quadratic_liver_law()) {
    AcousticModel m;
    m.speed = law;
    m.frequency = f;
    return m;
}

}  // namespace

TEST(SpeedOfSound, AmbientValues) {
    const AcousticModel m;
    // 1529.3 + 1.6856*37 + 0.061131*37^2
    EXPECT_NEAR(speed_of_sound(m, 0.0), 1675.3555, 1e-3);
    EXPECT_NEAR(q_of_theta(m, 0.0), 1675.3555 * 1675.3555, 5.0);
    const auto q5 = model_with_frequency(1e5, quintic_liver_law());
    const double t = 37.0;
    const double c5 = 1529.3 + 1.6856 * t + 6.1131e-2 * t * t - 2.2967e-3 * t * t * t +
                      2.2657e-5 * t * t * t * t - 7.1795e-8 * t * t * t * t * t;
    EXPECT_NEAR(speed_of_sound(q5, 0.0), c5, 1e-9);
    EXPECT_NEAR(speed_of_sound(q5, 0.0), 1596.505, 1e-3);
}

TEST(SpeedOfSound, DerivativesMatchFiniteDifferences) {
    for (const auto& law : {quadratic_liver_law(), quintic_liver_law()}) {
        const auto m = model_with_frequency(1e5, law);
        for (double th : {-10.0, 0.0, 3.7, 12.0, 25.0}) {
            EXPECT_NEAR(law.derivative(th), fd([&](double x) { return law.value(x); }, th), 1e-6);
            const double dq = dq_dtheta(m, th);
            EXPECT_NEAR(dq, fd([&](double x) { return q_of_theta(m, x); }, th), 1e-6 * std::abs(dq) + 1e-6);
            const double db = dbeta_dtheta(m, th);
            EXPECT_NEAR(db, fd([&](double x) { return beta_of_theta(m, x); }, th), 1e-6 * std::abs(db) + 1e-20);
        }
    }
}

TEST(SoundDiffusivity, ClosedForm) {
    const auto m = model_with_frequency(1e5, quintic_liver_law());
    const double alpha = 4.5e-6 * 1e5;
    const double omega = 2 * std::numbers::pi * 1e5;
    for (double th : {0.0, 5.0, 20.0}) {
        const double c = speed_of_sound(m, th);
        EXPECT_NEAR(beta_of_theta(m, th), 2 * alpha * c * c * c / (omega * omega), 1e-12 * c * c * c);
        EXPECT_GT(beta_of_theta(m, th), 0.0);
    }
    const AcousticModel one_hz;
    EXPECT_NEAR(one_hz.alpha_tilde(), 4.5e-6, 1e-20);
    EXPECT_NEAR(one_hz.omega(), 2 * std::numbers::pi, 1e-15);
}

TEST(Nonlinearity, CoefficientsAndActiveSelection) {
    const AcousticModel m;
    const double q = q_of_theta(m, 2.0);
    const auto k = k_coefficients(m, 2.0);
    EXPECT_NEAR(k.k_w, 6.0 / (1050.0 * q), 1e-20);
    EXPECT_NEAR(k.k_k, 5.0 / q, 1e-18);
    const auto w = active_k(EquationVariant::westervelt(), m, 2.0);
    EXPECT_EQ(w.k_k, 0.0);
    EXPECT_DOUBLE_EQ(w.k_w, k.k_w);
    const auto kz = active_k(EquationVariant::kuznetsov(), m, 2.0);
    EXPECT_EQ(kz.k_w, 0.0);
    EXPECT_DOUBLE_EQ(kz.k_k, k.k_k);
    EXPECT_EQ(EquationVariant::westervelt().gradient_coupling(), 0.0);
    EXPECT_EQ(EquationVariant::kuznetsov().gradient_coupling(), 1.0);
}

TEST(Nonlinearity, N1Coefficient) {
    const AcousticModel m;
    const double q = q_of_theta(m, 0.0);
    EXPECT_DOUBLE_EQ(n1_coefficient(EquationVariant::westervelt(), m, 0.0, 0.0, 0.0), 1.0);
    EXPECT_NEAR(n1_coefficient(EquationVariant::westervelt(), m, 0.0, 1e5, 7.0),
                1.0 + 2.0 * 6.0 / (1050.0 * q) * 1e5, 1e-14);
    EXPECT_NEAR(n1_coefficient(EquationVariant::kuznetsov(), m, 0.0, 1e5, 7.0), 1.0 + 2.0 * 5.0 / q * 7.0,
                1e-14);
}

TEST(AbsorbedEnergy, VariantLaws) {
    const auto m = model_with_frequency(1e5, quintic_liver_law());
    const double th = 1.5, u = 3.0, ut = 2e4;
    const double c = speed_of_sound(m, th), q = c * c, b = beta_of_theta(m, th);
    const double rho = 1050.0, alpha = m.alpha_tilde();
    EXPECT_NEAR(absorbed_energy(EquationVariant::westervelt(), m, u, ut, th),
                (alpha / c * u * u + 2 * b / (q * q) * ut * ut) / (2 * rho), 1e-12);
    EXPECT_NEAR(absorbed_energy(EquationVariant::kuznetsov(), m, u, ut, th), rho * alpha / c * u * u, 1e-12);
    for (auto v : {EquationVariant::westervelt(), EquationVariant::kuznetsov()}) {
        EXPECT_EQ(absorbed_energy(v, m, 0.0, 0.0, th), 0.0);
        EXPECT_GE(absorbed_energy(v, m, -u, -ut, th), 0.0);
        EXPECT_DOUBLE_EQ(absorbed_energy(v, m, u, ut, th), absorbed_energy(v, m, -u, -ut, th));
    }
}

TEST(HeatParams, DerivedFromTissueConstants) {
    const auto h = derived_heat_params(TissueConstants{});
    EXPECT_NEAR(h.kappa, 0.512 / (1050.0 * 3600.0), 1e-20);
    EXPECT_NEAR(h.kappa, 1.3545e-7, 1e-10);
    EXPECT_NEAR(h.nu, 1030.0 * 3620.0 / (1050.0 * 3600.0), 1e-15);
    EXPECT_NEAR(h.nu, 0.98640, 1e-4);
}

TEST(ModelDegeneracyTest, NonPositiveSpeedThrows) {
    AcousticModel m;
    m.speed = {{-1.0}, 0.0};
    EXPECT_THROW(q_of_theta(m, 0.0), ModelDegeneracy);
    // The quintic law turns negative far above physiological temperatures.
    const auto q5 = model_with_frequency(1e5, quintic_liver_law());
    EXPECT_THROW(q_of_theta(q5, 400.0), ModelDegeneracy);
    EXPECT_NO_THROW(q_of_theta(q5, 60.0));
}

TEST(WaveVariantNames, RoundTrip) {
    for (auto v : {WaveVariant::Westervelt, WaveVariant::Kuznetsov}) EXPECT_EQ(parse_wave_variant(to_string(v)), v);
    EXPECT_THROW(parse_wave_variant("burgers"), Error);
}

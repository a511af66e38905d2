#include "thermofem/coefficients.hpp"

#include <cmath>
#include <numbers>

#include "thermofem/errors.hpp"

namespace thermofem {

double SpeedOfSoundLaw::value(double theta) const {
    const double t = theta + ambient_temperature;
    double r = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) r = r * t + *it;
    return r;
}

double SpeedOfSoundLaw::derivative(double theta) const {
    const double t = theta + ambient_temperature;
    double r = 0.0;
    for (std::size_t k = coefficients.size(); k-- > 1;) r = r * t + static_cast<double>(k) * coefficients[k];
    return r;
}

SpeedOfSoundLaw quadratic_liver_law() { return {{1529.3, 1.6856, 6.1131e-2}, 37.0}; }

SpeedOfSoundLaw quintic_liver_law() {
    return {{1529.3, 1.6856, 6.1131e-2, -2.2967e-3, 2.2657e-5, -7.1795e-8}, 37.0};
}

double AcousticModel::omega() const { return 2.0 * std::numbers::pi * frequency; }

std::string to_string(WaveVariant v) {
    return v == WaveVariant::Westervelt ? "westervelt" : "kuznetsov";
}

WaveVariant parse_wave_variant(const std::string& s) {
    if (s == "westervelt") return WaveVariant::Westervelt;
    if (s == "kuznetsov") return WaveVariant::Kuznetsov;
    throw InvalidParameter("unknown wave variant '" + s + "'");
}

double speed_of_sound(const AcousticModel& m, double theta) { return m.speed.value(theta); }

namespace {

double checked_speed(const AcousticModel& m, double theta) {
    const double c = m.speed.value(theta);
    if (!(c > 0.0))
        throw ModelDegeneracy("speed of sound is nonpositive at theta = " + std::to_string(theta));
    return c;
}

}  // namespace

double q_of_theta(const AcousticModel& m, double theta) {
    const double c = checked_speed(m, theta);
    return c * c;
}

double dq_dtheta(const AcousticModel& m, double theta) {
    return 2.0 * checked_speed(m, theta) * m.speed.derivative(theta);
}

double beta_of_theta(const AcousticModel& m, double theta) {
    const double c = checked_speed(m, theta);
    const double w = m.omega();
    return 2.0 * m.alpha_tilde() * c * c * c / (w * w);
}

double dbeta_dtheta(const AcousticModel& m, double theta) {
    const double c = checked_speed(m, theta);
    const double w = m.omega();
    return 6.0 * m.alpha_tilde() * c * c * m.speed.derivative(theta) / (w * w);
}

NonlinearityCoefficients k_coefficients(const AcousticModel& m, double theta) {
    const double q = q_of_theta(m, theta);
    return {(1.0 + m.b_over_2a) / (m.density * q), m.b_over_2a / q};
}

NonlinearityCoefficients active_k(const EquationVariant& v, const AcousticModel& m, double theta) {
    const auto k = k_coefficients(m, theta);
    if (v.tag == WaveVariant::Westervelt) return {k.k_w, 0.0};
    return {0.0, k.k_k};
}

AbsorptionWeights absorption_weights(const EquationVariant& v, const AcousticModel& m,
                                     double theta) {
    const double c = checked_speed(m, theta);
    const double rho = m.density;
    if (v.tag == WaveVariant::Kuznetsov) return {rho * m.alpha_tilde() / c, 0.0};
    const double q = c * c;
    return {m.alpha_tilde() / (2.0 * rho * c), beta_of_theta(m, theta) / (rho * q * q)};
}

double absorbed_energy(const EquationVariant& v, const AcousticModel& m, double u, double u_t,
                       double theta) {
    const auto w = absorption_weights(v, m, theta);
    return w.u2 * u * u + w.ut2 * u_t * u_t;
}

double n1_coefficient(const EquationVariant& v, const AcousticModel& m, double theta, double u,
                      double u_t) {
    const auto k = active_k(v, m, theta);
    return 1.0 + 2.0 * k.k_w * u + 2.0 * k.k_k * u_t;
}

HeatParams derived_heat_params(const TissueConstants& t) {
    if (!(t.kappa_a > 0 && t.rho_a > 0 && t.c_a > 0 && t.rho_b > 0 && t.c_b > 0))
        throw InvalidParameter("tissue constants must be positive");
    const double heat_capacity = t.rho_a * t.c_a;
    return {t.kappa_a / heat_capacity, t.rho_b * t.c_b / heat_capacity};
}

}  // namespace thermofem

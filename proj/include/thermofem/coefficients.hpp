#pragma once

#include <string>
#include <vector>

namespace thermofem {

/// Speed of sound as a polynomial in the absolute temperature theta + ambient:
/// c(theta) = sum_k a_k (theta + ambient)^k.
struct SpeedOfSoundLaw {
    std::vector<double> coefficients;
    double ambient_temperature = 37.0;  // degC

    double value(double theta) const;
    double derivative(double theta) const;
};

/// Quadratic liver-tissue law.
SpeedOfSoundLaw quadratic_liver_law();
/// Fifth-order liver-tissue law.
SpeedOfSoundLaw quintic_liver_law();

/// Temperature-dependent acoustic medium.
struct AcousticModel {
    SpeedOfSoundLaw speed = quadratic_liver_law();
    double frequency = 1.0;              // fhat [Hz]
    double attenuation_per_hz = 4.5e-6;  // alpha_tilde = attenuation_per_hz * fhat [Np/m]
    double density = 1050.0;             // rho_a [kg/m^3]
    double b_over_2a = 5.0;              // B/(2A)

    double alpha_tilde() const { return attenuation_per_hz * frequency; }
    double omega() const;
};

enum class WaveVariant { Westervelt, Kuznetsov };

/// Selects the nonlinearity and the absorbed-energy law. Westervelt keeps k_W
/// with no gradient coupling; Kuznetsov keeps k_K with gradient coupling 1.
struct EquationVariant {
    WaveVariant tag = WaveVariant::Westervelt;

    double gradient_coupling() const { return tag == WaveVariant::Kuznetsov ? 1.0 : 0.0; }
    static EquationVariant westervelt() { return {WaveVariant::Westervelt}; }
    static EquationVariant kuznetsov() { return {WaveVariant::Kuznetsov}; }
};

std::string to_string(WaveVariant v);
WaveVariant parse_wave_variant(const std::string& s);

double speed_of_sound(const AcousticModel& m, double theta);

/// q = c^2. Throws ModelDegeneracy when c <= 0.
double q_of_theta(const AcousticModel& m, double theta);
double dq_dtheta(const AcousticModel& m, double theta);

/// Sound diffusivity beta = 2 alpha_tilde c^3 / omega^2.
double beta_of_theta(const AcousticModel& m, double theta);
double dbeta_dtheta(const AcousticModel& m, double theta);

struct NonlinearityCoefficients {
    double k_w = 0.0;
    double k_k = 0.0;
};

/// k_W = (1 + B/2A) / (rho q), k_K = (B/2A) / q.
NonlinearityCoefficients k_coefficients(const AcousticModel& m, double theta);

/// The coefficients the variant actually uses (the inactive one is zero).
NonlinearityCoefficients active_k(const EquationVariant& v, const AcousticModel& m, double theta);

/// Absorbed energy Q = alpha1(theta) u^2 + alpha2(theta) u_t^2.
struct AbsorptionWeights {
    double u2 = 0.0;
    double ut2 = 0.0;
};

/// Westervelt: alpha1 = alpha_tilde / (2 rho c), alpha2 = beta / (rho q^2).
/// Kuznetsov: alpha1 = rho alpha_tilde / c, alpha2 = 0.
AbsorptionWeights absorption_weights(const EquationVariant& v, const AcousticModel& m, double theta);

double absorbed_energy(const EquationVariant& v, const AcousticModel& m, double u, double u_t,
                       double theta);

/// Coefficient of u_tt in the wave equation, 1 + 2 k_W u + 2 k_K u_t.
double n1_coefficient(const EquationVariant& v, const AcousticModel& m, double theta, double u,
                      double u_t);

struct HeatParams {
    double kappa = 1.0;  // diffusion
    double nu = 1e-5;    // perfusion
};

/// Liver tissue ('a') and blood ('b') constants.
struct TissueConstants {
    double kappa_a = 0.512;  // W/(m K)
    double rho_a = 1050.0;   // kg/m^3
    double c_a = 3600.0;     // J/(kg K)
    double rho_b = 1030.0;   // kg/m^3
    double c_b = 3620.0;     // J/(kg K)
};

/// kappa = kappa_a / (rho_a C_a), nu = rho_b C_b / (rho_a C_a).
HeatParams derived_heat_params(const TissueConstants& t);

}  // namespace thermofem

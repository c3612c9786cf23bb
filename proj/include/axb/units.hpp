#pragma once

#include <limits>

#include "axb/errors.hpp"

namespace axb {

namespace detail {

/// Newton iteration square root usable in constant expressions.
constexpr double csqrt(double x, double guess, double prev) {
    return guess == prev ? guess : csqrt(x, 0.5 * (guess + x / guess), guess);
}

constexpr double csqrt(double x) {
    return x >= 0 && x < std::numeric_limits<double>::infinity()
               ? csqrt(x, x > 1 ? x : 1.0, 0.0)
               : std::numeric_limits<double>::quiet_NaN();
}

} // namespace detail

/// Physical constants in natural units (hbar = c = 1), energies in eV.
///
/// Magnetic fields carry dimension eV^2. The gauss conversion factor is
/// anchored so that the QED critical field B_crit = 4.4e13 G maps exactly
/// onto its natural-unit expression m_e^2/e with e = sqrt(4 pi alpha).
/// A field ratio B/B_crit is therefore identical whether formed in gauss
/// or in eV^2.
namespace constants {

inline constexpr double pi = 3.14159265358979323846;

/// Fine-structure constant.
inline constexpr double alpha = 7.2973525693e-3;

/// Electron mass [eV].
inline constexpr double m_e = 510998.95;

/// Elementary charge in Heaviside-Lorentz natural units, sqrt(4 pi alpha).
inline constexpr double e_charge = detail::csqrt(4.0 * pi * alpha);

/// QED critical magnetic field [gauss].
inline constexpr double b_crit_gauss = 4.4e13;

/// QED critical magnetic field m_e^2/e [eV^2].
inline constexpr double b_crit_ev2 = m_e * m_e / e_charge;

/// One gauss expressed in eV^2.
inline constexpr double gauss_to_ev2 = b_crit_ev2 / b_crit_gauss;

/// Planck constant times speed of light [eV m].
inline constexpr double hc_ev_m = 1.239841984e-6;

/// Coefficient 7 alpha/(45 pi) of the vacuum birefringence term.
inline constexpr double vacuum_qed_coeff = 7.0 * alpha / (45.0 * pi);

} // namespace constants

/// Converts a magnetic field from gauss to natural units [eV^2].
/// Negative field magnitudes are rejected.
inline double gauss_to_natural(double b_gauss) {
    detail::require(b_gauss >= 0.0, "gauss_to_natural: field must be non-negative");
    return b_gauss * constants::gauss_to_ev2;
}

/// Converts a magnetic field from natural units [eV^2] back to gauss.
inline double natural_to_gauss(double b_ev2) {
    detail::require(b_ev2 >= 0.0, "natural_to_gauss: field must be non-negative");
    return b_ev2 / constants::gauss_to_ev2;
}

/// Converts a field gradient from gauss/m to eV^2/m. Gradients may have
/// either sign.
inline double gradient_gauss_to_natural(double b1_gauss_per_m) {
    return b1_gauss_per_m * constants::gauss_to_ev2;
}

/// Photon energy [eV] of a vacuum wavelength [m].
inline double wavelength_to_omega(double lambda_m) {
    detail::require(lambda_m > 0.0, "wavelength_to_omega: wavelength must be positive");
    return constants::hc_ev_m / lambda_m;
}

/// Vacuum wavelength [m] of a photon energy [eV].
inline double omega_to_wavelength(double omega_ev) {
    detail::require(omega_ev > 0.0, "omega_to_wavelength: energy must be positive");
    return constants::hc_ev_m / omega_ev;
}

/// Axion-photon coupling from 1/GeV to 1/eV.
inline double coupling_inv_gev_to_inv_ev(double g_inv_gev) {
    detail::require(g_inv_gev >= 0.0, "coupling: must be non-negative");
    return g_inv_gev * 1e-9;
}

} // namespace axb

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>

#include "axb/errors.hpp"
#include "axb/units.hpp"

namespace axb {

/// Optical medium created by a static transverse magnetic field in which
/// photons of one polarization mix with a light pseudoscalar.
struct MediumParams {
    double omega;    ///< photon energy [eV]
    double b_field;  ///< transverse field at the reference point [eV^2]
    double g_a;      ///< two-photon coupling of the pseudoscalar [1/eV]
    double m_a;      ///< pseudoscalar mass [eV]
};

inline void check(const MediumParams& p) {
    detail::require(p.omega > 0.0, "MediumParams: omega must be positive");
    detail::require(p.b_field >= 0.0, "MediumParams: b_field must be non-negative");
    detail::require(p.g_a >= 0.0, "MediumParams: g_a must be non-negative");
    detail::require(p.m_a >= 0.0, "MediumParams: m_a must be non-negative");
}

/// Diagonal and off-diagonal entries of the 2x2 dispersion matrix
/// [[q_gamma, -i q_m], [i q_m, q_a]], all in eV^2.
struct QTerms {
    double q_gamma;  ///< QED vacuum birefringence term, >= 0
    double q_a;      ///< -m_a^2, <= 0
    double q_m;      ///< field-photon-pseudoscalar coupling term, >= 0
};

inline void check(const QTerms& q) {
    detail::require(q.q_gamma >= 0.0, "QTerms: q_gamma must be non-negative");
    detail::require(q.q_a <= 0.0, "QTerms: q_a must be non-positive");
    detail::require(q.q_m >= 0.0, "QTerms: q_m must be non-negative");
}

/// Evaluates the three dispersion-matrix entries for a medium:
/// q_gamma = omega^2 (7 alpha / 45 pi)(B/B_crit)^2, q_a = -m_a^2,
/// q_m = omega g_a B.
inline QTerms compute_q_terms(const MediumParams& p) {
    check(p);
    const double ratio = p.b_field / constants::b_crit_ev2;
    return QTerms{
        p.omega * p.omega * constants::vacuum_qed_coeff * ratio * ratio,
        -p.m_a * p.m_a,
        p.omega * p.g_a * p.b_field,
    };
}

/// Propagating eigenmodes of the mixed photon-pseudoscalar system.
///
/// lambda_pm are the eigenvalues of the dispersion matrix; the refractive
/// indices follow from k^2 = omega^2 + lambda, n = k/omega. delta_n_pm
/// hold n_pm - 1 evaluated without cancellation, which matters when the
/// indices differ from one by less than double-precision resolution.
struct ModeSolution {
    double lambda_plus;   ///< larger eigenvalue [eV^2]
    double lambda_minus;  ///< smaller eigenvalue [eV^2]
    double n_plus;        ///< refractive index of the plus mode
    double n_minus;       ///< refractive index of the minus mode
    double delta_n_plus;  ///< n_plus - 1, cancellation-free
    double delta_n_minus; ///< n_minus - 1, cancellation-free
    double phi;           ///< mixing angle [rad], in [0, pi/4] for q_gamma >= q_a
};

namespace detail {

/// n - 1 from lambda/omega^2 via (n^2-1)/(n+1); evaluated in extended
/// precision so residuals of order beta^2 ~ 1e-32 survive.
inline double index_deviation(double lambda, double omega) {
    const long double r = static_cast<long double>(lambda) /
                          (static_cast<long double>(omega) * static_cast<long double>(omega));
    const long double n = std::sqrt(1.0L + r);
    return static_cast<double>(r / (1.0L + n));
}

} // namespace detail

/// Diagonalizes the dispersion matrix.
///
/// Eigenvalues use the numerically stable quadratic-root form (the root
/// further from zero is computed directly, the other from the
/// determinant), so a small lambda_plus survives next to a large
/// |lambda_minus|. The mixing angle obeys tan(2 phi) = 2 q_m/(q_gamma -
/// q_a) with phi = pi/4 at exact degeneracy.
///
/// Throws evanescent_error if either n^2 <= 0.
inline ModeSolution mode_solution(const QTerms& q, double omega) {
    check(q);
    detail::require(omega > 0.0, "mode_solution: omega must be positive");

    const double tr = q.q_gamma + q.q_a;
    const double diff = q.q_gamma - q.q_a;
    const double s = std::sqrt(0.25 * diff * diff + q.q_m * q.q_m);

    double lam_plus;
    double lam_minus;
    if (s == 0.0) {
        lam_plus = lam_minus = 0.5 * tr;
    } else if (tr >= 0.0) {
        lam_plus = 0.5 * tr + s;
        const double det = q.q_gamma * q.q_a - q.q_m * q.q_m;
        lam_minus = lam_plus > 0.0 ? det / lam_plus : 0.5 * tr - s;
    } else {
        lam_minus = 0.5 * tr - s;
        const double det = q.q_gamma * q.q_a - q.q_m * q.q_m;
        lam_plus = det / lam_minus;
    }

    const double w2 = omega * omega;
    const double n2_minus = 1.0 + lam_minus / w2;
    if (n2_minus <= 0.0) {
        throw evanescent_error("mode_solution: minus mode is evanescent", n2_minus,
                               std::numeric_limits<double>::quiet_NaN());
    }
    const double n2_plus = 1.0 + lam_plus / w2;
    if (n2_plus <= 0.0) {
        throw evanescent_error("mode_solution: plus mode is evanescent", n2_plus,
                               std::numeric_limits<double>::quiet_NaN());
    }

    ModeSolution m{};
    m.lambda_plus = lam_plus;
    m.lambda_minus = lam_minus;
    m.delta_n_plus = detail::index_deviation(lam_plus, omega);
    m.delta_n_minus = detail::index_deviation(lam_minus, omega);
    m.n_plus = 1.0 + m.delta_n_plus;
    m.n_minus = 1.0 + m.delta_n_minus;
    m.phi = 0.5 * std::atan2(2.0 * q.q_m, diff);
    return m;
}

/// Refractive indices in the symmetric regime q_gamma = q_a = 0, where
/// n_pm = 1 +- beta with beta = g_a B/(2 omega).
struct SymmetricIndices {
    double beta;     ///< g_a B / (2 omega)
    double n_plus;   ///< 1 + beta
    double n_minus;  ///< 1 - beta
};

inline SymmetricIndices symmetric_indices(const MediumParams& p) {
    check(p);
    const double beta = p.g_a * p.b_field / (2.0 * p.omega);
    return SymmetricIndices{beta, 1.0 + beta, 1.0 - beta};
}

/// Unitary mixing matrix [[cos phi, i sin phi], [i sin phi, cos phi]]
/// in row-major order. Its columns are the eigenvectors of the
/// dispersion matrix for lambda_plus and lambda_minus.
inline std::array<std::complex<double>, 4> mixing_matrix(double phi) {
    const double c = std::cos(phi);
    const double sn = std::sin(phi);
    const std::complex<double> is{0.0, sn};
    return {std::complex<double>{c, 0.0}, is, is, std::complex<double>{c, 0.0}};
}

/// Applies the mixing matrix to an (photon, pseudoscalar) amplitude pair.
/// At phi = pi/4 a pure photon state maps to (1/sqrt2)(photon + i axion).
inline std::pair<std::complex<double>, std::complex<double>>
mix_states(double phi, std::complex<double> photon, std::complex<double> axion) {
    const auto r = mixing_matrix(phi);
    return {r[0] * photon + r[1] * axion, r[2] * photon + r[3] * axion};
}

} // namespace axb

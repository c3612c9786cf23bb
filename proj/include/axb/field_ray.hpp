#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "axb/detail/integrate.hpp"
#include "axb/errors.hpp"
#include "axb/mixing.hpp"
#include "axb/units.hpp"

namespace axb {

/// Transverse magnetic field B(y) = b0 + b1 (y - y0) with a declared
/// domain of validity, everything in natural units.
struct LinearFieldProfile {
    double b0;     ///< field at the reference point [eV^2]
    double b1;     ///< transverse gradient [eV^2/m]
    double y0;     ///< reference transverse position [m]
    double y_min;  ///< lower domain edge [m]
    double y_max;  ///< upper domain edge [m]

    [[nodiscard]] double b_at(double y) const { return b0 + b1 * (y - y0); }
};

inline void check(const LinearFieldProfile& f) {
    detail::require(f.y_min < f.y_max, "LinearFieldProfile: empty domain");
    detail::require(f.y0 >= f.y_min && f.y0 <= f.y_max,
                    "LinearFieldProfile: reference point outside domain");
    detail::require(f.b0 >= 0.0, "LinearFieldProfile: b0 must be non-negative");
    detail::require(f.b_at(f.y_min) >= 0.0 && f.b_at(f.y_max) >= 0.0,
                    "LinearFieldProfile: field becomes negative inside domain");
}

/// Which eigenmode of the mixed system a ray belongs to.
enum class Mode { plus, minus };

inline const char* to_string(Mode m) { return m == Mode::plus ? "plus" : "minus"; }

/// How mode indices are evaluated from the field.
enum class IndexModel {
    symmetric,  ///< maximal-mixing limit, n = 1 +- g_a B/(2 omega)
    exact,      ///< full dispersion-matrix eigenvalues
};

/// Local linearization n(y) = n0 + b (y - y0) of one mode's refractive
/// index across the field gradient.
struct IndexProfile {
    Mode mode;
    double n0;        ///< index at y0
    double delta_n0;  ///< n0 - 1, cancellation-free
    double b;         ///< transverse index gradient dn/dy [1/m]
    double y0;        ///< expansion point [m]
    double y_min;     ///< lower domain edge [m]
    double y_max;     ///< upper domain edge [m]

    [[nodiscard]] double n_at(double y) const { return n0 + b * (y - y0); }
    [[nodiscard]] bool contains(double y) const { return y >= y_min && y <= y_max; }
};

namespace detail {

struct EigenPair {
    double lam_plus;
    double lam_minus;
};

inline EigenPair dispersion_eigenvalues(const QTerms& q) {
    const double tr = q.q_gamma + q.q_a;
    const double diff = q.q_gamma - q.q_a;
    const double s = std::sqrt(0.25 * diff * diff + q.q_m * q.q_m);
    if (s == 0.0) return {0.5 * tr, 0.5 * tr};
    const double det = q.q_gamma * q.q_a - q.q_m * q.q_m;
    if (tr >= 0.0) {
        const double lp = 0.5 * tr + s;
        return {lp, lp > 0.0 ? det / lp : 0.5 * tr - s};
    }
    const double lm = 0.5 * tr - s;
    return {det / lm, lm};
}

/// d lambda_pm / dB at fixed omega, g_a, m_a.
inline double eigenvalue_field_derivative(const QTerms& q, double b_field, double omega,
                                          double g_a, bool plus) {
    const double qg_prime = b_field > 0.0 ? 2.0 * q.q_gamma / b_field : 0.0;
    const double qm_prime = omega * g_a;
    const double diff = q.q_gamma - q.q_a;
    const double s = std::sqrt(0.25 * diff * diff + q.q_m * q.q_m);
    const double s_prime =
        s > 0.0 ? (0.5 * diff * qg_prime + 2.0 * q.q_m * qm_prime) / (2.0 * s) : qm_prime;
    return 0.5 * qg_prime + (plus ? s_prime : -s_prime);
}

inline int ray_direction(double l_y, double b) {
    if (l_y > 0.0) return 1;
    if (l_y < 0.0) return -1;
    return b >= 0.0 ? 1 : -1;
}

} // namespace detail

/// Linearizes a mode's refractive index around the field reference point.
///
/// The exact model differentiates the dispersion-matrix eigenvalue along
/// the field gradient by the chain rule; the symmetric model uses the
/// maximal-mixing form n = 1 +- g_a B/(2 omega), b = +- g_a b1/(2 omega).
/// medium.b_field is ignored; the field profile supplies B(y).
///
/// Throws evanescent_error (with the offending position) if the mode
/// stops propagating anywhere on the domain.
inline IndexProfile index_profile(const MediumParams& medium, const LinearFieldProfile& field,
                                  Mode mode, IndexModel model = IndexModel::exact) {
    check(field);
    detail::require(medium.omega > 0.0, "index_profile: omega must be positive");
    detail::require(medium.g_a >= 0.0, "index_profile: g_a must be non-negative");
    detail::require(medium.m_a >= 0.0, "index_profile: m_a must be non-negative");

    const bool plus = mode == Mode::plus;

    // travelling-wave check across the domain, not just at y0
    const int scan_points = 11;
    for (int i = 0; i < scan_points; ++i) {
        const double y =
            field.y_min + (field.y_max - field.y_min) * static_cast<double>(i) / (scan_points - 1);
        double n2;
        if (model == IndexModel::symmetric) {
            const double n = 1.0 + (plus ? 1.0 : -1.0) * medium.g_a * field.b_at(y) /
                                       (2.0 * medium.omega);
            n2 = n * std::fabs(n);
        } else {
            const MediumParams at_y{medium.omega, field.b_at(y), medium.g_a, medium.m_a};
            const auto eig = detail::dispersion_eigenvalues(compute_q_terms(at_y));
            const double lam = plus ? eig.lam_plus : eig.lam_minus;
            n2 = 1.0 + lam / (medium.omega * medium.omega);
        }
        if (n2 <= 0.0) {
            throw evanescent_error("index_profile: mode is evanescent inside the domain", n2, y);
        }
    }

    IndexProfile prof{};
    prof.mode = mode;
    prof.y0 = field.y0;
    prof.y_min = field.y_min;
    prof.y_max = field.y_max;

    if (model == IndexModel::symmetric) {
        const double half_coupling = medium.g_a / (2.0 * medium.omega);
        const double beta0 = half_coupling * field.b0;
        prof.delta_n0 = plus ? beta0 : -beta0;
        prof.n0 = 1.0 + prof.delta_n0;
        prof.b = (plus ? 1.0 : -1.0) * half_coupling * field.b1;
    } else {
        const MediumParams at_y0{medium.omega, field.b0, medium.g_a, medium.m_a};
        const QTerms q = compute_q_terms(at_y0);
        const ModeSolution sol = mode_solution(q, medium.omega);
        prof.delta_n0 = plus ? sol.delta_n_plus : sol.delta_n_minus;
        prof.n0 = 1.0 + prof.delta_n0;
        const double dlam_db =
            detail::eigenvalue_field_derivative(q, field.b0, medium.omega, medium.g_a, plus);
        prof.b = field.b1 * dlam_db / (2.0 * prof.n0 * medium.omega * medium.omega);
    }
    return prof;
}

/// A ray sample: transverse position, longitudinal position, transverse
/// tangent component, and the mode it belongs to. The tangent is a unit
/// vector, l_z = sqrt(1 - l_y^2) >= 0 (forward propagation).
struct RayState {
    double y;    ///< transverse position [m]
    double z;    ///< longitudinal position [m]
    double l_y;  ///< transverse tangent component
    Mode mode;

    [[nodiscard]] double l_z() const {
        return std::sqrt(std::fmax(0.0, 1.0 - l_y * l_y));
    }
};

/// Sampled ray path, ordered along propagation (z non-decreasing).
struct Trajectory {
    Mode mode;
    std::vector<RayState> samples;
};

namespace detail {

inline void check_entry(const IndexProfile& prof, const RayState& entry) {
    require(std::fabs(entry.l_y) <= 1.0, "ray entry: |l_y| must not exceed 1");
    if (!prof.contains(entry.y)) {
        throw domain_error("ray entry: position outside the profile domain");
    }
}

/// Conserved transverse invariant C = n l_z of a ray in an n(y) medium.
inline double snell_invariant(const IndexProfile& prof, const RayState& entry) {
    const double n_e = prof.n_at(entry.y);
    return n_e * entry.l_z();
}

/// n(y) - C without cancellation, using n_e - C = n_e l_y^2/(1 + l_z).
inline double index_above_invariant(const IndexProfile& prof, const RayState& entry, double y) {
    const double n_e = prof.n_at(entry.y);
    const double lz = entry.l_z();
    const double ne_minus_c = n_e * entry.l_y * entry.l_y / (1.0 + lz);
    return ne_minus_c + prof.b * (y - entry.y);
}

inline double turning_position(const IndexProfile& prof, const RayState& entry) {
    const double c = snell_invariant(prof, entry);
    return prof.y0 + (c - prof.n0) / prof.b;
}

} // namespace detail

/// Transverse tangent component at position y of the ray defined by an
/// entry state, from the conserved invariant n l_z = const. The sign is
/// the outbound direction: the entry tangent's sign, or for normal entry
/// the direction of increasing index (rays bend toward larger n).
///
/// Throws turning_point_error when y lies beyond the ray's turning
/// point, with the turning position attached.
inline double tangent_ly(const IndexProfile& prof, const RayState& entry, double y) {
    detail::check_entry(prof, entry);
    if (!prof.contains(y)) throw domain_error("tangent_ly: y outside the profile domain");

    const double n = prof.n_at(y);
    const double c = detail::snell_invariant(prof, entry);
    const double above = detail::index_above_invariant(prof, entry, y);
    const double arg = above * (n + c);
    if (arg < 0.0) {
        throw turning_point_error("tangent_ly: position beyond the ray turning point",
                                  detail::turning_position(prof, entry));
    }
    const int dir = detail::ray_direction(entry.l_y, prof.b);
    return dir * std::sqrt(arg) / n;
}

/// Exact path of a normally entering ray in a linear index profile,
/// sampled in y between the entry point and y_end:
///
///   z(y) = z0 + (n0/|b|) arcosh(n(y)/n0)
///
/// evaluated through log1p for small index contrast. y_end must lie on
/// the side the ray bends toward (the side of increasing n).
inline Trajectory trajectory_closed_form(const IndexProfile& prof, const RayState& entry,
                                         double y_end, std::size_t n_samples = 33) {
    detail::check_entry(prof, entry);
    detail::require(std::fabs(entry.l_y) < 1e-14,
                    "trajectory_closed_form: requires normal entry (l_y = 0)");
    detail::require(n_samples >= 2, "trajectory_closed_form: need at least 2 samples");
    if (prof.b == 0.0) {
        throw degenerate_error("trajectory_closed_form: zero index gradient");
    }
    if (!prof.contains(y_end)) {
        throw domain_error("trajectory_closed_form: y_end outside the profile domain");
    }
    if ((y_end - entry.y) * prof.b < 0.0) {
        throw domain_error("trajectory_closed_form: y_end on the wrong side of the bend");
    }

    const double n_e = prof.n_at(entry.y);
    const double inv_scale = n_e / std::fabs(prof.b);
    const int dir = detail::ray_direction(0.0, prof.b);

    Trajectory traj{prof.mode, {}};
    traj.samples.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double y =
            entry.y + (y_end - entry.y) * static_cast<double>(i) / (n_samples - 1);
        const double t = prof.b * (y - entry.y) / n_e;  // (n - n_e)/n_e >= 0
        const double z = entry.z + inv_scale * std::log1p(t + std::sqrt(t * (t + 2.0)));
        const double n = prof.n_at(y);
        const double l_y = dir * std::sqrt(std::fmax(0.0, t * (t + 2.0))) * n_e / n;
        traj.samples.push_back(RayState{y, z, l_y, prof.mode});
    }
    return traj;
}

/// Same exact path parameterized by longitudinal distance instead:
/// y(z) = y0 + (n0/b)(cosh(b z/n0) - 1), l_y(z) = tanh(b z/n0),
/// with cosh - 1 evaluated as 2 sinh^2(x/2). Useful to sample a pass of
/// fixed length when the transverse excursion is vanishingly small.
inline RayState closed_form_state_at_z(const IndexProfile& prof, const RayState& entry,
                                       double dz) {
    detail::check_entry(prof, entry);
    detail::require(std::fabs(entry.l_y) < 1e-14,
                    "closed_form_state_at_z: requires normal entry (l_y = 0)");
    detail::require(dz >= 0.0, "closed_form_state_at_z: dz must be non-negative");
    if (prof.b == 0.0) {
        return RayState{entry.y, entry.z + dz, 0.0, prof.mode};
    }
    const double n_e = prof.n_at(entry.y);
    const double u = prof.b * dz / n_e;
    const double sh = std::sinh(0.5 * u);
    const double y = entry.y + (n_e / prof.b) * 2.0 * sh * sh;
    return RayState{y, entry.z + dz, std::tanh(u), prof.mode};
}

/// Ray path by adaptive quadrature of dz/dy = C/sqrt(n^2 - C^2) for a
/// linear profile, supporting oblique entry. The inverse-square-root
/// endpoint singularity of normal entry is removed by the substitution
/// u = sqrt(|y - y0|). abs_tol is the absolute tolerance on z [m].
inline Trajectory trajectory_quadrature(const IndexProfile& prof, const RayState& entry,
                                        double y_end, double abs_tol = 1e-12,
                                        std::size_t n_samples = 33) {
    detail::check_entry(prof, entry);
    detail::require(n_samples >= 2, "trajectory_quadrature: need at least 2 samples");
    detail::require(abs_tol > 0.0, "trajectory_quadrature: abs_tol must be positive");
    if (prof.b == 0.0) {
        throw degenerate_error("trajectory_quadrature: zero index gradient");
    }
    if (!prof.contains(y_end)) {
        throw domain_error("trajectory_quadrature: y_end outside the profile domain");
    }

    const int dir = detail::ray_direction(entry.l_y, prof.b);
    if (y_end != entry.y && (y_end - entry.y) * dir < 0.0) {
        throw domain_error("trajectory_quadrature: y_end behind the ray direction");
    }
    if (y_end != entry.y && detail::index_above_invariant(prof, entry, y_end) <= 0.0) {
        throw turning_point_error("trajectory_quadrature: y_end beyond the ray turning point",
                                  detail::turning_position(prof, entry));
    }

    const double c = detail::snell_invariant(prof, entry);
    const auto integrand = [&](double y) {
        const double above = detail::index_above_invariant(prof, entry, y);
        const double n = prof.n_at(y);
        return c / std::sqrt(above * (n + c));
    };

    const bool singular_entry = std::fabs(entry.l_y) < 1e-14;
    const double seg_tol = abs_tol / static_cast<double>(n_samples - 1);

    Trajectory traj{prof.mode, {}};
    traj.samples.reserve(n_samples);
    traj.samples.push_back(RayState{entry.y, entry.z, entry.l_y, prof.mode});

    double z = entry.z;
    double y_prev = entry.y;
    for (std::size_t i = 1; i < n_samples; ++i) {
        const double y =
            entry.y + (y_end - entry.y) * static_cast<double>(i) / (n_samples - 1);
        if (i == 1 && singular_entry && y != entry.y) {
            // z increment = int_0^U 2C du / sqrt(|b| (n(y(u)) + C))
            const double span = std::fabs(y - entry.y);
            const double u_max = std::sqrt(span);
            const auto regular = [&](double u) {
                const double yy = entry.y + dir * u * u;
                return 2.0 * c / std::sqrt(std::fabs(prof.b) * (prof.n_at(yy) + c));
            };
            z += detail::integrate_adaptive(regular, 0.0, u_max, seg_tol);
        } else if (y != y_prev) {
            z += dir * detail::integrate_adaptive(integrand, y_prev, y, seg_tol);
        }
        traj.samples.push_back(RayState{y, z, tangent_ly(prof, entry, y), prof.mode});
        y_prev = y;
    }
    return traj;
}

/// Ray path by quadrature for an arbitrary index function n(y). The ray
/// direction toward y_end is taken from the entry tangent, or from the
/// sign of y_end - y0 for normal entry. n must stay above the ray
/// invariant along the way (checked, turning_point_error otherwise).
/// After a normal entry the first sample segment is integrated from a
/// local linear model of n fitted to that segment, since a generic
/// callable resolves n - C near its own turning point only to rounding
/// noise; keep the first segment short against the curvature scale of n.
template <class NFn>
    requires(!std::is_same_v<std::remove_cvref_t<NFn>, IndexProfile>)
Trajectory trajectory_quadrature(NFn&& n_of_y, const RayState& entry, double y_end,
                                 double abs_tol = 1e-12, std::size_t n_samples = 33) {
    detail::require(std::fabs(entry.l_y) <= 1.0, "trajectory_quadrature: |l_y| must not exceed 1");
    detail::require(n_samples >= 2, "trajectory_quadrature: need at least 2 samples");
    detail::require(abs_tol > 0.0, "trajectory_quadrature: abs_tol must be positive");

    const double n_e = n_of_y(entry.y);
    detail::require(n_e > 0.0, "trajectory_quadrature: n(entry) must be positive");
    const double c = n_e * entry.l_z();
    const int dir = entry.l_y != 0.0 ? (entry.l_y > 0.0 ? 1 : -1)
                                     : (y_end >= entry.y ? 1 : -1);
    if (entry.l_y != 0.0 && y_end != entry.y && (y_end - entry.y) * dir < 0.0) {
        throw domain_error("trajectory_quadrature: y_end behind the ray direction");
    }

    // reachability scan; locates a turning point if n dips to C
    const int scan = 64;
    for (int i = 1; i <= scan; ++i) {
        const double y = entry.y + (y_end - entry.y) * static_cast<double>(i) / scan;
        if (n_of_y(y) <= c && y != entry.y) {
            double lo = entry.y + (y_end - entry.y) * static_cast<double>(i - 1) / scan;
            double hi = y;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (n_of_y(mid) > c ? lo : hi) = mid;
            }
            throw turning_point_error("trajectory_quadrature: path reaches a turning point",
                                      0.5 * (lo + hi));
        }
    }

    const auto integrand = [&](double y) {
        const double n = n_of_y(y);
        return c / std::sqrt((n - c) * (n + c));
    };

    const bool singular_entry = std::fabs(entry.l_y) < 1e-14;
    const double seg_tol = abs_tol / static_cast<double>(n_samples - 1);

    Trajectory traj{entry.mode, {}};
    traj.samples.reserve(n_samples);
    traj.samples.push_back(entry);

    double z = entry.z;
    double y_prev = entry.y;
    for (std::size_t i = 1; i < n_samples; ++i) {
        const double y =
            entry.y + (y_end - entry.y) * static_cast<double>(i) / (n_samples - 1);
        if (i == 1 && singular_entry && y != entry.y) {
            // A generic callable resolves n - c near the entry only to its
            // own rounding noise, which an adaptive rule then chases without
            // bound. Fit the chord slope across this segment and use the
            // closed form of that local linear model instead.
            const double dn = n_of_y(y) - c;
            detail::require(dn > 0.0,
                            "trajectory_quadrature: index not increasing across the entry segment");
            const double t = dn / c;
            z += std::fabs(y - entry.y) * (c / dn) *
                 std::log1p(t + std::sqrt(t * (t + 2.0)));
        } else if (y != y_prev) {
            z += dir * detail::integrate_adaptive(integrand, y_prev, y, seg_tol);
        }
        const double n = n_of_y(y);
        const double arg = std::fmax(0.0, (n - c) * (n + c));
        traj.samples.push_back(RayState{y, z, dir * std::sqrt(arg) / n, entry.mode});
        y_prev = y;
    }
    return traj;
}

/// Controls for the adaptive ray-equation integrator.
struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol_y = 1e-14;   ///< absolute floor for y and z error [m]
    double abs_tol_l = 1e-14;   ///< absolute floor for the tangent error
    double initial_step = 0.0;  ///< 0 picks span/256
    long max_steps = 2000000;
};

namespace detail {

struct OdeStepper {
    double rel_tol, atol_y, atol_l;

    template <class Deriv>
    bool advance(Deriv&& deriv, std::array<double, 3>& s, double& h) const {
        const std::array<double, 3> scale = {
            atol_y + rel_tol * std::fabs(s[0]),
            atol_y + rel_tol * std::fabs(s[1]),
            atol_l + rel_tol * std::fabs(s[2]),
        };
        const auto trial = dp5_step(deriv, s, h, scale);
        const double err = trial.err_norm;
        const double factor =
            err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
        if (err <= 1.0) {
            s = trial.state;
            s[2] = std::clamp(s[2], -1.0, 1.0);
            h *= factor;
            return true;
        }
        h *= factor;
        return false;
    }
};

} // namespace detail

/// Integrates the ray equation in arclength with an adaptive embedded
/// Runge-Kutta pair, recording every accepted step:
///
///   dy/dl = l_y,  dz/dl = sqrt(1 - l_y^2),
///   dl_y/dl = (1/n)(dn/dy)(1 - l_y^2)
///
/// The tangent stays unit by construction (l_z is derived, not
/// integrated). n_of_y and dn_dy are the index and its y derivative.
template <class NFn, class DnFn>
Trajectory trajectory_ode(NFn&& n_of_y, DnFn&& dn_dy, const RayState& entry, double arclength,
                          const OdeOptions& opts = {}) {
    detail::require(std::fabs(entry.l_y) <= 1.0, "trajectory_ode: |l_y| must not exceed 1");
    detail::require(arclength >= 0.0, "trajectory_ode: arclength must be non-negative");

    const auto deriv = [&](const std::array<double, 3>& s) {
        const double lz = std::sqrt(std::fmax(0.0, 1.0 - s[2] * s[2]));
        const double n = n_of_y(s[0]);
        return std::array<double, 3>{s[2], lz, dn_dy(s[0]) / n * (1.0 - s[2] * s[2])};
    };

    const detail::OdeStepper stepper{opts.rel_tol, opts.abs_tol_y, opts.abs_tol_l};
    std::array<double, 3> s = {entry.y, entry.z, entry.l_y};

    Trajectory traj{entry.mode, {}};
    traj.samples.push_back(entry);
    if (arclength == 0.0) return traj;

    double l = 0.0;
    double h = opts.initial_step > 0.0 ? opts.initial_step : arclength / 256.0;
    long steps = 0;
    while (l < arclength) {
        if (++steps > opts.max_steps) {
            throw error("trajectory_ode: step budget exhausted");
        }
        const bool last = h >= arclength - l;
        double h_try = last ? arclength - l : h;
        const double h_before = h_try;
        std::array<double, 3> s_try = s;
        double h_ctrl = h_try;
        if (stepper.advance(deriv, s_try, h_ctrl)) {
            s = s_try;
            l += h_before;
            if (!last) h = h_ctrl;
            traj.samples.push_back(RayState{s[0], s[1], s[2], entry.mode});
        } else {
            h = h_ctrl;
            if (h < 1e-15 * arclength) {
                throw error("trajectory_ode: step size underflow");
            }
        }
    }
    return traj;
}

inline Trajectory trajectory_ode(const IndexProfile& prof, const RayState& entry,
                                 double arclength, const OdeOptions& opts = {}) {
    detail::check_entry(prof, entry);
    return trajectory_ode([&](double y) { return prof.n_at(y); },
                          [&](double) { return prof.b; }, entry, arclength, opts);
}

/// Integrates the ray equation until the ray crosses y_target and lands
/// on it by shrinking the final step. Used as the reference answer for
/// the analytic and quadrature routes.
template <class NFn, class DnFn>
RayState ode_state_at_y(NFn&& n_of_y, DnFn&& dn_dy, const RayState& entry, double y_target,
                        const OdeOptions& opts = {}) {
    detail::require(std::fabs(entry.l_y) <= 1.0, "ode_state_at_y: |l_y| must not exceed 1");
    if (y_target == entry.y) return entry;

    const auto deriv = [&](const std::array<double, 3>& s) {
        const double lz = std::sqrt(std::fmax(0.0, 1.0 - s[2] * s[2]));
        const double n = n_of_y(s[0]);
        return std::array<double, 3>{s[2], lz, dn_dy(s[0]) / n * (1.0 - s[2] * s[2])};
    };
    const detail::OdeStepper stepper{opts.rel_tol, opts.abs_tol_y, opts.abs_tol_l};

    std::array<double, 3> s = {entry.y, entry.z, entry.l_y};
    const double span0 = std::fabs(y_target - entry.y);
    double h = opts.initial_step > 0.0 ? opts.initial_step : span0 / 16.0;
    const double y_tol = std::fmax(1e-15 * span0, 1e-18);
    long steps = 0;

    while (true) {
        if (++steps > opts.max_steps) {
            throw error("ode_state_at_y: step budget exhausted");
        }
        std::array<double, 3> s_try = s;
        double h_ctrl = h;
        const double h_taken = h;
        if (!stepper.advance(deriv, s_try, h_ctrl)) {
            h = h_ctrl;
            if (h < 1e-18) throw error("ode_state_at_y: step size underflow");
            continue;
        }
        const bool crossed = (s[0] - y_target) * (s_try[0] - y_target) <= 0.0 &&
                             s_try[0] != s[0];
        if (!crossed) {
            s = s_try;
            h = h_ctrl;
            continue;
        }
        // bisect the step length until it lands on y_target
        double h_lo = 0.0;
        double h_hi = h_taken;
        std::array<double, 3> s_land = s_try;
        const std::array<double, 3> unit_scale = {1.0, 1.0, 1.0};
        for (int it = 0; it < 120 && std::fabs(s_land[0] - y_target) > y_tol; ++it) {
            const double h_mid = 0.5 * (h_lo + h_hi);
            const auto s_mid = detail::dp5_step(deriv, s, h_mid, unit_scale).state;
            if ((s[0] - y_target) * (s_mid[0] - y_target) <= 0.0) {
                h_hi = h_mid;
                s_land = s_mid;
            } else {
                h_lo = h_mid;
            }
        }
        s_land[2] = std::clamp(s_land[2], -1.0, 1.0);
        return RayState{y_target, s_land[1], s_land[2], entry.mode};
    }
}

inline RayState ode_state_at_y(const IndexProfile& prof, const RayState& entry, double y_target,
                               const OdeOptions& opts = {}) {
    detail::check_entry(prof, entry);
    return ode_state_at_y([&](double y) { return prof.n_at(y); },
                          [&](double) { return prof.b; }, entry, y_target, opts);
}

/// Mode deflection angles over one pass of length L and their split.
struct SplittingAngles {
    double theta_plus;           ///< deflection of the plus mode [rad]
    double theta_minus;          ///< deflection of the minus mode [rad]
    double delta_theta;          ///< theta_plus - theta_minus [rad]
    std::optional<double> f_geometric;  ///< (b1/b0) L, absent when b0 = 0
};

/// Small-angle splitting after one pass: theta_pm = b_pm L / n0_pm with
/// the mode index gradients of the chosen model. In the symmetric model
/// this is theta_pm = +- g_a b1 L/(2 omega n0_pm) and delta_theta =
/// g_a b1 L/omega up to O(beta^2).
inline SplittingAngles splitting_angle(const MediumParams& medium,
                                       const LinearFieldProfile& field, double length,
                                       IndexModel model = IndexModel::symmetric) {
    detail::require(length > 0.0, "splitting_angle: length must be positive");
    const IndexProfile plus = index_profile(medium, field, Mode::plus, model);
    const IndexProfile minus = index_profile(medium, field, Mode::minus, model);

    SplittingAngles out{};
    out.theta_plus = plus.b * length / plus.n0;
    out.theta_minus = minus.b * length / minus.n0;
    out.delta_theta = out.theta_plus - out.theta_minus;
    if (field.b0 > 0.0) {
        out.f_geometric = (field.b1 / field.b0) * length;
    }
    return out;
}

/// Dimensionless field inhomogeneity factor (b1/b0) L.
/// Throws domain_error when the reference field vanishes.
inline double geometric_factor(const LinearFieldProfile& field, double length) {
    detail::require(length > 0.0, "geometric_factor: length must be positive");
    detail::require(field.b0 > 0.0, "geometric_factor: undefined for b0 = 0");
    return (field.b1 / field.b0) * length;
}

} // namespace axb

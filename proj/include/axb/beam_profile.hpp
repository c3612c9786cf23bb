#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "axb/errors.hpp"

namespace axb {

/// Reference Gaussian beam: intensity total_power * G(y; waist_sigma)
/// with G the unit-area Gaussian.
struct GaussianBeam {
    double waist_sigma;        ///< standard deviation of the intensity profile [m]
    double total_power = 1.0;  ///< reference integrated intensity
};

inline void check(const GaussianBeam& b) {
    detail::require(b.waist_sigma > 0.0, "GaussianBeam: waist_sigma must be positive");
    detail::require(b.total_power > 0.0, "GaussianBeam: total_power must be positive");
}

/// One displaced copy of the beam. extra_var widens the copy, used when
/// a center stands for a pooled family of beams with internal spread.
struct ProfileCenter {
    double y;               ///< center offset [m]
    double weight;          ///< integrated intensity of this copy
    double extra_var = 0.0; ///< additional variance [m^2]
};

/// Sum of displaced Gaussian copies, with a sampled grid for export.
/// The centers are authoritative; the grid is a rendering.
struct CompositeProfile {
    double sigma;  ///< waist of the underlying beam [m]
    std::vector<ProfileCenter> centers;
    std::vector<double> grid_y;
    std::vector<double> grid_intensity;
};

/// Analytic intensity of the composite at a point.
inline double intensity(const CompositeProfile& p, double y) {
    static const double inv_root_2pi = 0.3989422804014326779;
    double sum = 0.0;
    for (const auto& c : p.centers) {
        if (c.weight == 0.0) continue;
        const double var = p.sigma * p.sigma + c.extra_var;
        const double s = std::sqrt(var);
        const double d = (y - c.y) / s;
        sum += c.weight * inv_root_2pi / s * std::exp(-0.5 * d * d);
    }
    return sum;
}

/// Builds the composite profile of displaced beam copies and samples it
/// on a symmetric grid covering all centers out to eight widths. Grid
/// spacing follows the smaller of the waist and the center spread, with
/// a floor of waist/1000 so narrow bifurcation patterns cannot demand
/// unbounded grids; all metrics are evaluated analytically anyway.
inline CompositeProfile compose_intensity(const GaussianBeam& beam,
                                          std::vector<ProfileCenter> centers) {
    check(beam);
    detail::require(!centers.empty(), "compose_intensity: need at least one center");
    double total = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double max_var = 0.0;
    bool any = false;
    for (const auto& c : centers) {
        detail::require(c.weight >= 0.0, "compose_intensity: weights must be non-negative");
        detail::require(c.extra_var >= 0.0, "compose_intensity: extra_var must be non-negative");
        total += c.weight;
        if (c.weight == 0.0) continue;  // carries no intensity, must not widen the grid
        lo = any ? std::fmin(lo, c.y) : c.y;
        hi = any ? std::fmax(hi, c.y) : c.y;
        max_var = std::fmax(max_var, c.extra_var);
        any = true;
    }
    if (total <= 0.0) {
        throw degenerate_error("compose_intensity: total weight is zero");
    }

    CompositeProfile prof;
    prof.sigma = beam.waist_sigma;
    prof.centers = std::move(centers);

    const double sigma = beam.waist_sigma;
    const double spread = hi - lo;
    const double feature = std::fmax(std::fmin(sigma, spread), sigma * 1e-3);
    const double h = feature / 64.0;
    const double wing = 8.0 * std::sqrt(sigma * sigma + max_var);
    const double left = lo - wing;
    const double right = hi + wing;
    // Cap the export grid; sub-waist spacing is already far finer than the
    // trapezoid rule needs for ten-digit power recovery on a Gaussian.
    const std::size_t max_points = 32769;
    std::size_t points = static_cast<std::size_t>(std::ceil((right - left) / h)) + 1;
    points = std::min(points, max_points);
    if (points < 2) points = 2;

    prof.grid_y.reserve(points);
    prof.grid_intensity.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double y = left + (right - left) * static_cast<double>(i) /
                                    static_cast<double>(points - 1);
        prof.grid_y.push_back(y);
        prof.grid_intensity.push_back(intensity(prof, y));
    }
    return prof;
}

/// Shape numbers of a composite profile against its reference beam.
struct ProfileMetrics {
    double peak_position;   ///< location of the intensity maximum [m]
    double peak_intensity;  ///< intensity at the maximum
    double fwhm;            ///< full width at half maximum [m]
    double central_deficit; ///< 1 - I(0)/I_ref(0), cancellation-free
};

/// Full width at half maximum of an unshifted beam, 2 sqrt(2 ln 2) sigma.
inline double fwhm_reference(const GaussianBeam& beam) {
    check(beam);
    return 2.0 * std::sqrt(2.0 * std::log(2.0)) * beam.waist_sigma;
}

/// Relative on-axis intensity deficit of the composite against the
/// reference beam centered at y = 0. Evaluated per center through
/// expm1 so shifts far below the waist do not cancel away:
/// deficit = sum_i (w_i/P)(1 - (sigma/s_i) e^(-y_i^2/2 s_i^2)) + (P - W)/P.
inline double central_deficit(const CompositeProfile& p, const GaussianBeam& beam) {
    check(beam);
    detail::require(p.sigma == beam.waist_sigma,
                    "central_deficit: profile and reference waists differ");
    double total = 0.0;
    double sum = 0.0;
    for (const auto& c : p.centers) {
        if (c.weight == 0.0) continue;
        const double var_ratio = c.extra_var / (p.sigma * p.sigma);
        const double var = p.sigma * p.sigma + c.extra_var;
        const double t = 0.5 * c.y * c.y / var + 0.5 * std::log1p(var_ratio);
        sum += c.weight * (-std::expm1(-t));
        total += c.weight;
    }
    const double power = beam.total_power;
    return sum / power + (power - total) / power;
}

namespace detail {

inline double refine_peak(const CompositeProfile& p, double a, double b, double tol) {
    static const double inv_phi = 0.6180339887498948482;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = intensity(p, x1);
    double f2 = intensity(p, x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = intensity(p, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = intensity(p, x1);
        }
    }
    return 0.5 * (a + b);
}

inline double bisect_half_level(const CompositeProfile& p, double inside, double outside,
                                double half, double tol) {
    // intensity(inside) >= half >= intensity(outside)
    while (std::fabs(outside - inside) > tol) {
        const double mid = 0.5 * (inside + outside);
        (intensity(p, mid) >= half ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
}

} // namespace detail

/// Peak, width and on-axis deficit of the composite. The peak is found
/// by a coarse scan refined by golden-section search; the half-maximum
/// crossings by outward march and bisection to 1e-6 of the waist.
inline ProfileMetrics metrics(const CompositeProfile& p, const GaussianBeam& beam) {
    check(beam);
    detail::require(!p.centers.empty(), "metrics: profile has no centers");
    double total = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double max_var = 0.0;
    bool any = false;
    for (const auto& c : p.centers) {
        total += c.weight;
        if (c.weight == 0.0) continue;
        lo = any ? std::fmin(lo, c.y) : c.y;
        hi = any ? std::fmax(hi, c.y) : c.y;
        max_var = std::fmax(max_var, c.extra_var);
        any = true;
    }
    if (total <= 0.0) throw degenerate_error("metrics: total weight is zero");

    const double sigma_max = std::sqrt(p.sigma * p.sigma + max_var);
    const double tol = 1e-6 * p.sigma;

    // coarse scan for the peak
    const double left = lo - 2.0 * sigma_max;
    const double right = hi + 2.0 * sigma_max;
    const std::size_t coarse = 4096;
    double best_y = left;
    double best_i = intensity(p, left);
    for (std::size_t i = 1; i < coarse; ++i) {
        const double y = left + (right - left) * static_cast<double>(i) /
                                    static_cast<double>(coarse - 1);
        const double val = intensity(p, y);
        if (val > best_i) {
            best_i = val;
            best_y = y;
        }
    }
    const double step = (right - left) / static_cast<double>(coarse - 1);
    const double peak_pos = detail::refine_peak(p, best_y - step, best_y + step, tol * 1e-3);
    const double peak_val = intensity(p, peak_pos);
    if (peak_val <= 0.0) throw degenerate_error("metrics: profile has no peak");

    const double half = 0.5 * peak_val;
    double march = sigma_max;
    double y_r = peak_pos;
    while (intensity(p, y_r) >= half) {
        y_r += march;
        if (y_r > hi + 50.0 * sigma_max) {
            throw degenerate_error("metrics: no right half-maximum crossing");
        }
    }
    double y_l = peak_pos;
    while (intensity(p, y_l) >= half) {
        y_l -= march;
        if (y_l < lo - 50.0 * sigma_max) {
            throw degenerate_error("metrics: no left half-maximum crossing");
        }
    }
    const double right_cross = detail::bisect_half_level(p, y_r - march, y_r, half, tol);
    const double left_cross = detail::bisect_half_level(p, y_l + march, y_l, half, tol);

    ProfileMetrics out{};
    out.peak_position = peak_pos;
    out.peak_intensity = peak_val;
    out.fwhm = right_cross - left_cross;
    out.central_deficit = central_deficit(p, beam);
    return out;
}

/// Scaled readout of a deficit through a resonance or modulation gain.
struct ModulationReport {
    double input_deficit;  ///< instantaneous relative deficit
    double gain;           ///< user-supplied enhancement factor, >= 1
    double reported;       ///< input_deficit * gain
};

/// Applies a user-supplied gain to a measured deficit. The gain is an
/// input of the measurement scheme, not derived here; callers should
/// record its provenance next to the result.
inline ModulationReport modulation_report(double deficit, double gain) {
    detail::require(deficit >= 0.0 && deficit <= 1.0,
                    "modulation_report: deficit must lie in [0, 1]");
    detail::require(gain >= 1.0, "modulation_report: gain must be at least 1");
    const double reported = deficit * gain;
    detail::require(reported <= 1.0, "modulation_report: amplified deficit exceeds unity");
    return ModulationReport{deficit, gain, reported};
}

} // namespace axb

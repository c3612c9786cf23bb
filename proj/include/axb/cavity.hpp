#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "axb/errors.hpp"

namespace axb {

/// Multipass cavity in unfolded coordinates: every pass has length
/// pass_length, a mirror only reverses the longitudinal direction, and
/// at each pass a beam splits into two with transverse kicks
/// +- theta_mode. A beam with accumulated angle a and offset y maps to
/// y' = y + (a + s theta_mode/2) L, a' = a + s theta_mode, s = +-1.
struct CavityConfig {
    double pass_length;         ///< L [m]
    int passes;                 ///< number of passes N
    double theta_mode;          ///< per-mode kick per pass [rad]
    double weight_plus = 0.5;   ///< intensity fraction of the s = +1 child
    double weight_minus = 0.5;  ///< intensity fraction of the s = -1 child
    double axion_loss = 0.0;    ///< intensity fraction destroyed at each mirror
};

inline void check(const CavityConfig& c) {
    detail::require(c.pass_length > 0.0, "CavityConfig: pass_length must be positive");
    detail::require(c.passes >= 1, "CavityConfig: passes must be at least 1");
    detail::require(c.theta_mode >= 0.0, "CavityConfig: theta_mode must be non-negative");
    detail::require(c.weight_plus >= 0.0 && c.weight_minus >= 0.0,
                    "CavityConfig: split weights must be non-negative");
    detail::require(std::fabs(c.weight_plus + c.weight_minus - 1.0) <= 1e-12,
                    "CavityConfig: split weights must sum to 1");
    detail::require(c.axion_loss >= 0.0 && c.axion_loss < 1.0,
                    "CavityConfig: axion_loss must lie in [0, 1)");
}

/// One beam in the bifurcation tree.
struct BeamNode {
    double y;       ///< transverse offset [m]
    double angle;   ///< accumulated transverse angle [rad]
    double weight;  ///< intensity fraction
    int depth;      ///< number of passes taken
};

/// Exact bifurcation tree leaves after config.passes splits, 2^N beams.
/// Refuses more than 22 passes; use propagate_moments beyond that.
inline std::vector<BeamNode> enumerate_exact(const CavityConfig& config) {
    check(config);
    detail::require(config.passes <= 22, "enumerate_exact: more than 22 passes, use the lattice");

    const double keep = 1.0 - config.axion_loss;
    std::vector<BeamNode> current{BeamNode{0.0, 0.0, 1.0, 0}};
    std::vector<BeamNode> next;
    for (int p = 1; p <= config.passes; ++p) {
        next.clear();
        next.reserve(current.size() * 2);
        for (const BeamNode& node : current) {
            const double half = 0.5 * config.theta_mode;
            next.push_back(BeamNode{
                node.y + (node.angle + half) * config.pass_length,
                node.angle + config.theta_mode,
                node.weight * config.weight_plus * keep,
                p,
            });
            next.push_back(BeamNode{
                node.y + (node.angle - half) * config.pass_length,
                node.angle - config.theta_mode,
                node.weight * config.weight_minus * keep,
                p,
            });
        }
        current.swap(next);
    }
    return current;
}

/// Beams pooled by their accumulated angle, which after p passes lives
/// on the integer lattice k theta_mode, k in {-p, -p+2, ..., p}. Pooling
/// keeps the exact weight, mean offset and raw second moment m2 =
/// E[y^2]; first and second moments are closed under the pass map, so
/// the lattice evolves exactly in O(N^2) time.
struct AngleLatticeSummary {
    std::int64_t angle_index;  ///< k; accumulated angle is k theta_mode
    double weight;             ///< pooled intensity
    double mean_y;             ///< intensity-weighted mean offset [m]
    double m2_y;               ///< intensity-weighted raw second moment [m^2]
};

/// Transverse spread along the cavity, sampled at checkpoints.
struct SpreadCheckpoint {
    double z_total;  ///< unfolded distance travelled [m]
    double spread;   ///< standard deviation of the beam offsets [m]
};

/// Log-log growth fit of spread against distance.
struct GrowthFit {
    double exponent;  ///< least-squares slope of log spread vs log z
    double residual;  ///< rms residual of the fit in log space
};

/// Result of the lattice evolution: the final-depth pooled summaries,
/// the global spread curve and its growth fit.
struct SpreadReport {
    double std_y;                ///< final standard deviation of offsets [m]
    double weighted_separation;  ///< final sum of weight * E|y| [m]
    double fitted_exponent;      ///< growth exponent, NaN when not fittable
    double fit_residual;         ///< rms log residual, NaN when not fittable
    std::vector<SpreadCheckpoint> checkpoints;
};

struct CavityResult {
    std::vector<AngleLatticeSummary> lattice;
    SpreadReport report;
};

/// Closed-form standard deviation of the offsets when every pass splits
/// with equal weights: theta L sqrt(N(4N^2-1)/12), which approaches
/// theta L N^(3/2)/sqrt(3) for large N.
inline double affine_walk_std(double theta_mode, double pass_length, int passes) {
    const double n = static_cast<double>(passes);
    return theta_mode * pass_length * std::sqrt(n * (4.0 * n * n - 1.0) / 12.0);
}

/// Mean absolute value of a normal distribution with the given mean and
/// standard deviation.
inline double folded_normal_mean(double mu, double sigma) {
    if (sigma <= 0.0) return std::fabs(mu);
    static const double root_2_over_pi = std::sqrt(2.0 / 3.14159265358979323846);
    const double r = mu / sigma;
    return sigma * root_2_over_pi * std::exp(-0.5 * r * r) +
           mu * std::erf(r / std::sqrt(2.0));
}

/// Weighted mean |y| of the pooled lattice, each node approximated by a
/// normal distribution with its pooled mean and variance.
inline double weighted_separation(const std::vector<AngleLatticeSummary>& lattice) {
    double sum = 0.0;
    for (const auto& node : lattice) {
        if (node.weight <= 0.0) continue;
        const double var = std::fmax(0.0, node.m2_y - node.mean_y * node.mean_y);
        sum += node.weight * folded_normal_mean(node.mean_y, std::sqrt(var));
    }
    return sum;
}

/// Exact weighted mean |y| over enumerated beams.
inline double weighted_separation(const std::vector<BeamNode>& beams) {
    double sum = 0.0;
    for (const auto& node : beams) sum += node.weight * std::fabs(node.y);
    return sum;
}

/// Least-squares growth exponent of log(spread) against log(z). The
/// checkpoints must span at least two decades in z and have strictly
/// positive spreads.
inline GrowthFit fit_growth_exponent(const std::vector<SpreadCheckpoint>& checkpoints) {
    detail::require(checkpoints.size() >= 3, "fit_growth_exponent: need at least 3 checkpoints");
    double z_min = checkpoints.front().z_total;
    double z_max = z_min;
    for (const auto& c : checkpoints) {
        detail::require(c.z_total > 0.0, "fit_growth_exponent: checkpoints need z > 0");
        if (c.spread <= 0.0) {
            throw degenerate_error("fit_growth_exponent: zero spread checkpoint");
        }
        z_min = std::fmin(z_min, c.z_total);
        z_max = std::fmax(z_max, c.z_total);
    }
    detail::require(z_max >= 100.0 * z_min,
                    "fit_growth_exponent: need two decades of distance");

    const double n = static_cast<double>(checkpoints.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& c : checkpoints) {
        sx += std::log(c.z_total);
        sy += std::log(c.spread);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& c : checkpoints) {
        const double dx = std::log(c.z_total) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(c.spread) - my);
    }
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (const auto& c : checkpoints) {
        const double r = std::log(c.spread) - my - slope * (std::log(c.z_total) - mx);
        ss += r * r;
    }
    return GrowthFit{slope, std::sqrt(ss / n)};
}

namespace detail {

/// Deterministic checkpoint pass list: every pass up to 128, then
/// geometrically thinned, always including the final pass.
inline std::vector<char> checkpoint_marks(int passes) {
    std::vector<char> mark(static_cast<std::size_t>(passes) + 1, 0);
    for (int p = 1; p <= passes && p <= 128; ++p) mark[p] = 1;
    double g = 128.0;
    while (g < passes) {
        g *= 1.03;
        const int p = static_cast<int>(std::ceil(g));
        mark[std::min(p, passes)] = 1;
    }
    mark[passes] = 1;
    return mark;
}

} // namespace detail

/// Evolves the pooled angle lattice over config.passes passes.
///
/// Each child lattice node gathers from its two possible parents, so
/// the result does not depend on any traversal order. Weight, mean and
/// second moment transform exactly under the affine pass map; only the
/// association of beams into angle classes is used, no sampling.
inline CavityResult propagate_moments(const CavityConfig& config) {
    check(config);
    const int n = config.passes;
    const double theta_l = config.theta_mode * config.pass_length;
    const double keep = 1.0 - config.axion_loss;

    // index j holds angle k = 2j - p after pass p
    std::vector<double> w{1.0}, sy{0.0}, syy{0.0};
    std::vector<double> w2, sy2, syy2;

    const auto marks = detail::checkpoint_marks(n);
    SpreadReport report{};
    report.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
    report.fit_residual = std::numeric_limits<double>::quiet_NaN();

    for (int p = 1; p <= n; ++p) {
        const std::size_t size = static_cast<std::size_t>(p) + 1;
        w2.assign(size, 0.0);
        sy2.assign(size, 0.0);
        syy2.assign(size, 0.0);

        for (std::size_t j = 0; j < size; ++j) {
            // parent with s = +1 sits at j-1, parent with s = -1 at j
            if (j > 0 && w[j - 1] != 0.0) {
                const double k_par = 2.0 * static_cast<double>(j - 1) - (p - 1);
                const double c = (k_par + 0.5) * theta_l;
                const double pw = config.weight_plus * keep;
                w2[j] += pw * w[j - 1];
                sy2[j] += pw * (sy[j - 1] + c * w[j - 1]);
                syy2[j] += pw * (syy[j - 1] + 2.0 * c * sy[j - 1] + c * c * w[j - 1]);
            }
            if (j < size - 1 && w[j] != 0.0) {
                const double k_par = 2.0 * static_cast<double>(j) - (p - 1);
                const double c = (k_par - 0.5) * theta_l;
                const double mw = config.weight_minus * keep;
                w2[j] += mw * w[j];
                sy2[j] += mw * (sy[j] + c * w[j]);
                syy2[j] += mw * (syy[j] + 2.0 * c * sy[j] + c * c * w[j]);
            }
        }
        w.swap(w2);
        sy.swap(sy2);
        syy.swap(syy2);

        if (marks[p]) {
            double wt = 0.0, m1 = 0.0, m2 = 0.0;
            for (std::size_t j = 0; j < size; ++j) {
                wt += w[j];
                m1 += sy[j];
                m2 += syy[j];
            }
            const double mean = m1 / wt;
            const double var = std::fmax(0.0, m2 / wt - mean * mean);
            report.checkpoints.push_back(
                SpreadCheckpoint{p * config.pass_length, std::sqrt(var)});
        }
    }

    CavityResult result;
    result.lattice.reserve(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        const std::int64_t k = 2 * static_cast<std::int64_t>(j) - n;
        const double weight = w[j];
        const double mean = weight > 0.0 ? sy[j] / weight : 0.0;
        const double m2 = weight > 0.0 ? syy[j] / weight : 0.0;
        result.lattice.push_back(AngleLatticeSummary{k, weight, mean, m2});
    }

    report.std_y = report.checkpoints.empty() ? 0.0 : report.checkpoints.back().spread;
    report.weighted_separation = weighted_separation(result.lattice);

    bool fittable = report.checkpoints.size() >= 10;
    double z_lo = report.checkpoints.empty() ? 0.0 : report.checkpoints.front().z_total;
    double z_hi = z_lo;
    for (const auto& c : report.checkpoints) {
        z_hi = std::fmax(z_hi, c.z_total);
        if (c.spread <= 0.0) fittable = false;
    }
    if (fittable && z_hi >= 100.0 * z_lo) {
        const GrowthFit fit = fit_growth_exponent(report.checkpoints);
        report.fitted_exponent = fit.exponent;
        report.fit_residual = fit.residual;
    }
    result.report = std::move(report);
    return result;
}

/// Spread checkpoints of the no-resplitting control: two beams leave the
/// first split with deflections +-theta_mode/2 and never split again, so
/// their offsets are +-(theta_mode/2) z and the spread grows linearly.
inline std::vector<SpreadCheckpoint> two_beam_control_checkpoints(const CavityConfig& config) {
    check(config);
    const auto marks = detail::checkpoint_marks(config.passes);
    std::vector<SpreadCheckpoint> out;
    for (int p = 1; p <= config.passes; ++p) {
        if (!marks[p]) continue;
        const double z = p * config.pass_length;
        out.push_back(SpreadCheckpoint{z, 0.5 * config.theta_mode * z});
    }
    return out;
}

} // namespace axb

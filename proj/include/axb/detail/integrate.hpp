#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "axb/errors.hpp"

namespace axb::detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
inline constexpr std::array<double, 8> gk_nodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};

inline constexpr std::array<double, 8> gk_weights_k = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

inline constexpr std::array<double, 4> gk_weights_g = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct PanelEstimate {
    double kronrod;
    double error;
};

template <class F>
PanelEstimate gk15_panel(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double f_mid = f(mid);
    double sum_k = gk_weights_k[7] * f_mid;
    double sum_g = gk_weights_g[3] * f_mid;
    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = half * gk_nodes[i];
        const double pair = f(mid - dx) + f(mid + dx);
        sum_k += gk_weights_k[i] * pair;
        if (i % 2 == 1) sum_g += gk_weights_g[i / 2] * pair;
    }
    const double kronrod = sum_k * half;
    const double gauss = sum_g * half;
    return {kronrod, std::fabs(kronrod - gauss)};
}

/// Globally adaptive bisection quadrature over [a, b] (a > b allowed,
/// handled by sign). Throws quadrature_error when the absolute tolerance
/// cannot be met within the subdivision budget.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol) {
    if (a == b) return 0.0;
    const double sign = a < b ? 1.0 : -1.0;
    const double lo = std::fmin(a, b);
    const double hi = std::fmax(a, b);

    struct Segment {
        double a, b, value, error;
    };
    constexpr std::size_t max_segments = 4096;
    std::array<Segment, max_segments> heap{};
    std::size_t count = 0;

    const auto push = [&](double x0, double x1) {
        const auto est = gk15_panel(f, x0, x1);
        heap[count++] = Segment{x0, x1, est.kronrod, est.error};
    };

    push(lo, hi);
    double total_err = heap[0].error;
    double total_val = heap[0].value;

    while (total_err > abs_tol) {
        if (count + 1 >= max_segments) {
            throw quadrature_error("integrate_adaptive: subdivision budget exhausted",
                                   sign * total_val, total_err);
        }
        std::size_t worst = 0;
        for (std::size_t i = 1; i < count; ++i) {
            if (heap[i].error > heap[worst].error) worst = i;
        }
        const Segment seg = heap[worst];
        const double mid = 0.5 * (seg.a + seg.b);
        if (mid <= seg.a || mid >= seg.b) {
            throw quadrature_error("integrate_adaptive: interval underflow",
                                   sign * total_val, total_err);
        }
        const auto left = gk15_panel(f, seg.a, mid);
        const auto right = gk15_panel(f, mid, seg.b);
        heap[worst] = Segment{seg.a, mid, left.kronrod, left.error};
        heap[count++] = Segment{mid, seg.b, right.kronrod, right.error};
        total_val += left.kronrod + right.kronrod - seg.value;
        total_err += left.error + right.error - seg.error;
    }
    return sign * total_val;
}

/// One embedded Dormand-Prince 5(4) trial step for a fixed-size state.
/// Returns the 5th-order solution and the scaled error norm of the
/// embedded comparison; the caller owns the step-size control.
template <std::size_t N>
struct Dp5Result {
    std::array<double, N> state;
    double err_norm;
};

template <std::size_t N, class Deriv>
Dp5Result<N> dp5_step(Deriv&& deriv, const std::array<double, N>& s0, double h,
                      const std::array<double, N>& scale) {
    using V = std::array<double, N>;
    const auto axpy = [](const V& base, double hh, std::initializer_list<std::pair<double, const V*>> terms) {
        V out = base;
        for (const auto& [c, k] : terms) {
            for (std::size_t i = 0; i < N; ++i) out[i] += hh * c * (*k)[i];
        }
        return out;
    };

    const V k1 = deriv(s0);
    const V k2 = deriv(axpy(s0, h, {{1.0 / 5, &k1}}));
    const V k3 = deriv(axpy(s0, h, {{3.0 / 40, &k1}, {9.0 / 40, &k2}}));
    const V k4 = deriv(axpy(s0, h, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}}));
    const V k5 = deriv(axpy(s0, h,
                            {{19372.0 / 6561, &k1},
                             {-25360.0 / 2187, &k2},
                             {64448.0 / 6561, &k3},
                             {-212.0 / 729, &k4}}));
    const V k6 = deriv(axpy(s0, h,
                            {{9017.0 / 3168, &k1},
                             {-355.0 / 33, &k2},
                             {46732.0 / 5247, &k3},
                             {49.0 / 176, &k4},
                             {-5103.0 / 18656, &k5}}));
    const V s5 = axpy(s0, h,
                      {{35.0 / 384, &k1},
                       {500.0 / 1113, &k3},
                       {125.0 / 192, &k4},
                       {-2187.0 / 6784, &k5},
                       {11.0 / 84, &k6}});
    const V k7 = deriv(s5);

    // difference of the 5th- and embedded 4th-order weights
    constexpr std::array<double, 7> ed = {
        35.0 / 384 - 5179.0 / 57600,
        0.0,
        500.0 / 1113 - 7571.0 / 16695,
        125.0 / 192 - 393.0 / 640,
        -2187.0 / 6784 + 92097.0 / 339200,
        11.0 / 84 - 187.0 / 2100,
        -1.0 / 40,
    };
    double err = 0.0;
    const std::array<const V*, 7> ks = {&k1, &k2, &k3, &k4, &k5, &k6, &k7};
    for (std::size_t i = 0; i < N; ++i) {
        double e = 0.0;
        for (std::size_t j = 0; j < 7; ++j) e += ed[j] * (*ks[j])[i];
        e *= h;
        const double r = e / scale[i];
        err += r * r;
    }
    return {s5, std::sqrt(err / N)};
}

} // namespace axb::detail

#pragma once

#include <cmath>
#include <string>

#include "tanprime/error.hpp"
#include "tanprime/numeric.hpp"
#include "tanprime/scales.hpp"

namespace tanprime {

/// The phase f(y) = y^c tan^theta(log y) restricted to the window
/// (domain_lo, domain_hi], where tan(log y) lies in (4/9, 2].
struct PhaseContext {
    double c = 0.0;
    double theta = 0.0;
    double domain_lo = 0.0;
    double domain_hi = 0.0;
    long m = 0;  // log y is reduced by m*pi before the tangent is taken

    static PhaseContext from(const ProblemConfig& config, const DerivedScales& scales) {
        return {config.c, config.theta, scales.delta1, scales.delta2, scales.m};
    }
};

namespace detail {

inline double reduced_log(const PhaseContext& ctx, double y) { return add_pi_multiple(std::log(y), -ctx.m); }

inline double tan_log(const PhaseContext& ctx, double y) { return std::tan(reduced_log(ctx, y)); }

// Unchecked evaluations, valid on the closed window.
inline double phase_raw(const PhaseContext& ctx, double y) {
    return std::pow(y, ctx.c) * std::pow(tan_log(ctx, y), ctx.theta);
}

inline double phase_derivative_raw(const PhaseContext& ctx, double y) {
    const double t = tan_log(ctx, y);
    const double sec2 = 1.0 + t * t;
    return std::pow(y, ctx.c - 1.0) * std::pow(t, ctx.theta - 1.0) * (ctx.c * t + ctx.theta * sec2);
}

inline double phase_second_derivative_raw(const PhaseContext& ctx, double y) {
    const double c = ctx.c;
    const double th = ctx.theta;
    const double t = tan_log(ctx, y);
    const double sec2 = 1.0 + t * t;
    const double bracket = (2.0 * th * sec2 + c * c - c) * t * t + (2.0 * c - 1.0) * th * sec2 * t +
                           (th * th - th) * sec2 * sec2;
    return std::pow(y, c - 2.0) * std::pow(t, th - 2.0) * bracket;
}

inline void check_domain(const PhaseContext& ctx, double y) {
    if (!(y > ctx.domain_lo && y <= ctx.domain_hi)) {
        fail(error_kind::domain, "y = " + std::to_string(y) + " outside the window (" +
                                     std::to_string(ctx.domain_lo) + ", " + std::to_string(ctx.domain_hi) + "]");
    }
}

}  // namespace detail

inline double phase_value(const PhaseContext& ctx, double y) {
    detail::check_domain(ctx, y);
    return detail::phase_raw(ctx, y);
}

/// f'(y) = y^{c-1} tan^{theta-1}(log y) (c tan(log y) + theta sec^2(log y)); positive on the window.
inline double phase_derivative(const PhaseContext& ctx, double y) {
    detail::check_domain(ctx, y);
    return detail::phase_derivative_raw(ctx, y);
}

inline double phase_second_derivative(const PhaseContext& ctx, double y) {
    detail::check_domain(ctx, y);
    return detail::phase_second_derivative_raw(ctx, y);
}

/// dy/dt of the inverse map t -> y, written out from the implicit equation
/// t = y^c tan^theta(log y) rather than as 1/f'.
inline double inverse_slope(const PhaseContext& ctx, double y) {
    detail::check_domain(ctx, y);
    const double t = detail::tan_log(ctx, y);
    const double sec2 = 1.0 + t * t;
    return std::pow(y, 1.0 - ctx.c) / ((ctx.c * t + ctx.theta * sec2) * std::pow(t, ctx.theta - 1.0));
}

/// Solves f(y) = t on the window.  Bisection narrows the bracket to a relative
/// width of 1e-3, then Newton steps polish to |f(y) - t| <= 1e-12 |t|.
inline double invert_phase(const PhaseContext& ctx, double t) {
    double lo = ctx.domain_lo;
    double hi = ctx.domain_hi;
    const double f_lo = detail::phase_raw(ctx, lo);
    const double f_hi = detail::phase_raw(ctx, hi);
    if (!(t >= f_lo && t <= f_hi)) {
        fail(error_kind::out_of_range, "t = " + std::to_string(t) + " outside phase range [" +
                                           std::to_string(f_lo) + ", " + std::to_string(f_hi) + "]");
    }
    const double tol = std::abs(t) * 1e-12;
    if (t - f_lo <= tol) return lo;
    if (f_hi - t <= tol) return hi;

    constexpr int max_iterations = 200;
    int iter = 0;
    for (; iter < max_iterations && hi - lo > 1e-3 * lo; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (detail::phase_raw(ctx, mid) < t) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double y = 0.5 * (lo + hi);
    for (; iter < max_iterations; ++iter) {
        const double r = detail::phase_raw(ctx, y) - t;
        if (std::abs(r) <= tol) return y;
        if (r < 0.0) {
            lo = y;
        } else {
            hi = y;
        }
        double next = y - r / detail::phase_derivative_raw(ctx, y);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == y) return y;
        y = next;
    }
    fail(error_kind::out_of_range, "phase inversion did not converge within 200 iterations");
}

}  // namespace tanprime

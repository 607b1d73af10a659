#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <vector>

#include "tanprime/error.hpp"
#include "tanprime/numeric.hpp"

namespace tanprime {

/// Compactly supported bump: the indicator of [-a, a], a = 7 eps / 8,
/// convolved with k unit-mass boxes of width delta = eps / (4k).
///
///   psi = 1 on |y| <= 3 eps / 4,  0 <= psi < 1 between,  psi = 0 on |y| >= eps
///   Psi(x) = sin(2 pi a x) / (pi x) * (sin(pi delta x) / (pi delta x))^k
///
/// psi is a degree-k spline, C^{k-1} across its knots.
struct SmoothingKernel {
    double epsilon = 0.0;
    int k = 0;
    double a = 0.0;
    double delta = 0.0;
};

inline constexpr int max_kernel_order = 1'000'000;

inline SmoothingKernel make_kernel(double epsilon, int k) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail(error_kind::validation, "kernel epsilon must be positive");
    if (k < 1) fail(error_kind::validation, "kernel order k must be at least 1");
    if (k > max_kernel_order) fail(error_kind::validation, "kernel order k above 10^6 (mollifier width underflows)");
    return {epsilon, k, 7.0 * epsilon / 8.0, epsilon / (4.0 * k)};
}

namespace detail {

// CDF of the sum of k independent U(0,1) variables (Irwin-Hall), as the
// partial sum of order-(k+1) cardinal B-splines evaluated by the Cox-de Boor
// recurrence.  Every term is non-negative, so there is no cancellation for
// large k; the complementary tail is summed directly when it is the smaller
// side.
inline double irwin_hall_cdf(int k, double s) {
    if (s <= 0.0) return 0.0;
    if (s >= k) return 1.0;
    const double fl = std::floor(s);
    const auto l = static_cast<long>(fl);
    const double u = s - fl;
    // v[i] = N_r(u + i), i = 0..r-1, for the current order r.
    std::vector<double> v(static_cast<std::size_t>(k) + 1, 0.0);
    v[0] = 1.0;
    for (int r = 2; r <= k + 1; ++r) {
        const double inv = 1.0 / (r - 1);
        for (int i = r - 1; i >= 0; --i) {
            const double x = u + i;
            const double left = i <= r - 2 ? v[i] : 0.0;
            const double right = i >= 1 ? v[i - 1] : 0.0;
            v[i] = (x * left + (r - x) * right) * inv;
        }
    }
    // Shift j = l - i contributes to the CDF iff j >= 0.
    neumaier_sum below;
    neumaier_sum above;
    for (int i = 0; i <= k; ++i) {
        if (i <= l) {
            below.add(v[i]);
        } else {
            above.add(v[i]);
        }
    }
    return s <= 0.5 * k ? below.value() : 1.0 - above.value();
}

}  // namespace detail

inline double psi_eval(const SmoothingKernel& kernel, double y) {
    const double ay = std::abs(y);
    if (ay <= 0.75 * kernel.epsilon) return 1.0;
    if (ay >= kernel.epsilon) return 0.0;
    // Transition: psi(y) = P(Z <= a - |y|) with Z = delta * (IrwinHall_k - k/2),
    // i.e. the Irwin-Hall CDF at 4k (1 - |y| / eps).
    const double s = 4.0 * kernel.k * (1.0 - ay / kernel.epsilon);
    return detail::irwin_hall_cdf(kernel.k, s);
}

inline double psi_fourier(const SmoothingKernel& kernel, double x) {
    if (x == 0.0) return 2.0 * kernel.a;
    const double core = std::sin(2.0 * std::numbers::pi * kernel.a * x) / (std::numbers::pi * x);
    const double mollifier = sinc(std::numbers::pi * kernel.delta * x);
    return core * std::pow(mollifier, kernel.k);
}

/// min(7 eps / 4, 1 / (pi |x|), (1 / (pi |x|)) (k / (2 pi |x| eps / 8))^k)
inline double fourier_bound(const SmoothingKernel& kernel, double x) {
    const double mass = 7.0 * kernel.epsilon / 4.0;
    const double ax = std::abs(x);
    if (ax == 0.0) return mass;
    const double decay = 1.0 / (std::numbers::pi * ax);
    const double ratio = kernel.k / (2.0 * std::numbers::pi * ax * kernel.epsilon / 8.0);
    const double power = decay * std::pow(ratio, kernel.k);
    return std::min({mass, decay, power});
}

/// Tail of the k-th power branch, integral over |x| >= h of the bound,
/// multiplied by `scale`:  scale * 2 (4k / (pi eps h))^k / (pi k).
inline double fourier_tail_integral(const SmoothingKernel& kernel, double h, double scale = 1.0) {
    const double base = 4.0 * kernel.k / (std::numbers::pi * kernel.epsilon * h);
    return scale * 2.0 * std::pow(base, kernel.k) / (std::numbers::pi * kernel.k);
}

/// CSV of (y, psi(y)) at `samples` evenly spaced points of [-eps, eps].
inline void write_kernel_csv(std::ostream& os, const SmoothingKernel& kernel, std::size_t samples) {
    os << "y,psi\n";
    char buf[80];
    for (std::size_t i = 0; i < samples; ++i) {
        const double y = samples == 1 ? 0.0
                                      : -kernel.epsilon + 2.0 * kernel.epsilon * static_cast<double>(i) /
                                                              static_cast<double>(samples - 1);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", y, psi_eval(kernel, y));
        os << buf;
    }
}

/// Log-spaced frequencies in [lo, hi] (inclusive), lo > 0.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double l0 = std::log(lo);
    const double l1 = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return out;
}

/// CSV of (x, Psi(x), bound(x)) on a log grid over [1e-3 / eps, 1e6 / eps].
inline void write_fourier_csv(std::ostream& os, const SmoothingKernel& kernel, std::size_t samples) {
    os << "x,Psi,bound\n";
    char buf[96];
    for (double x : log_grid(1e-3 / kernel.epsilon, 1e6 / kernel.epsilon, samples)) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x, psi_fourier(kernel, x), fourier_bound(kernel, x));
        os << buf;
    }
}

}  // namespace tanprime

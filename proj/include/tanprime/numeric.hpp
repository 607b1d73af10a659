#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>

#include "tanprime/error.hpp"

namespace tanprime {

using complex = std::complex<double>;

// pi = pi_hi + pi_lo to about 107 bits.
inline constexpr double pi_hi = 3.141592653589793116;
inline constexpr double pi_lo = 1.2246467991473532072e-16;

/// Neumaier's variant of Kahan summation.  Order dependent, so callers that
/// need reproducibility must feed terms in a fixed order.
class neumaier_sum {
public:
    neumaier_sum() = default;
    explicit neumaier_sum(double first) : sum_(first) {}

    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    neumaier_sum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    void merge(const neumaier_sum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class complex_sum {
public:
    void add(complex z) noexcept {
        re_.add(z.real());
        im_.add(z.imag());
    }
    void merge(const complex_sum& other) noexcept {
        re_.merge(other.re_);
        im_.merge(other.im_);
    }
    complex value() const noexcept { return {re_.value(), im_.value()}; }

private:
    neumaier_sum re_;
    neumaier_sum im_;
};

inline double compensated_sum(std::initializer_list<double> terms) noexcept {
    neumaier_sum s;
    for (double t : terms) s.add(t);
    return s.value();
}

inline double compensated_sum(std::span<const double> terms) noexcept {
    neumaier_sum s;
    for (double t : terms) s.add(t);
    return s.value();
}

/// Sum of m*pi and `offset` with the rounding error of m*pi carried along.
inline double add_pi_multiple(double offset, long m) noexcept {
    const double md = static_cast<double>(m);
    const double hi = md * pi_hi;
    const double hi_err = std::fma(md, pi_hi, -hi);
    return compensated_sum({hi, offset, hi_err, md * pi_lo});
}

/// x - round(x), in [-1/2, 1/2].
inline double reduce_turns(double x) noexcept { return x - std::nearbyint(x); }

inline constexpr double extended_phase_threshold = 1099511627776.0;   // 2^40
inline constexpr double max_phase_magnitude = 4503599627370496.0;     // 2^52

/// Fractional part of alpha*f (in turns), reduced to [-1/2, 1/2].  Above
/// 2^40 turns the rounding error of the product is recovered with an FMA and
/// folded back in; above 2^52 the fractional part is meaningless and the call
/// is rejected.  Odd in alpha bit-for-bit.
inline double phase_turns(double alpha, double f) {
    const double p = alpha * f;
    const double ap = std::abs(p);
    if (ap <= extended_phase_threshold) return reduce_turns(p);
    if (!(ap <= max_phase_magnitude)) {
        fail(error_kind::out_of_range, "phase alpha*f exceeds 2^52 turns; fractional part is lost");
    }
    const double err = std::fma(alpha, f, -p);
    return reduce_turns(reduce_turns(p) + err);
}

/// e(r) = exp(2 pi i r) for an already reduced r.
inline complex unit_phasor(double turns) noexcept {
    const double angle = 2.0 * std::numbers::pi * turns;
    return {std::cos(angle), std::sin(angle)};
}

/// e(alpha * f) with phase reduction.
inline complex expi_turns(double alpha, double f) { return unit_phasor(phase_turns(alpha, f)); }

/// sin(z)/z, with the removable singularity filled in.
inline double sinc(double z) noexcept {
    if (std::abs(z) < 1e-4) {
        const double z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

/// n-point Gauss-Legendre rule on [-1, 1], computed once by Newton iteration
/// on the Legendre recurrence.
template <std::size_t N>
struct gauss_legendre {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};

    gauss_legendre() {
        for (std::size_t i = 0; i < (N + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(N) + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0;
                double p1 = x;
                for (std::size_t k = 2; k <= N; ++k) {
                    const double kk = static_cast<double>(k);
                    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                    p0 = p1;
                    p1 = p2;
                }
                dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[N - 1 - i] = x;
            weights[i] = w;
            weights[N - 1 - i] = w;
        }
        if constexpr (N % 2 == 1) nodes[N / 2] = 0.0;
    }

    static const gauss_legendre& instance() {
        static const gauss_legendre rule;
        return rule;
    }
};

}  // namespace tanprime

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <vector>

#include "tanprime/error.hpp"
#include "tanprime/numeric.hpp"
#include "tanprime/parallel.hpp"
#include "tanprime/prime_window.hpp"
#include "tanprime/scales.hpp"
#include "tanprime/tangent_phase.hpp"

namespace tanprime {

/// S(alpha) = sum over the table of log p * e(alpha f(p)), ascending p,
/// compensated.  Exactly conjugate-symmetric in alpha.
inline complex prime_exp_sum(const PrimeTable& table, double alpha) {
    if (!table.has_phases()) fail(error_kind::validation, "prime table carries no phase values");
    complex_sum acc;
    for (std::size_t i = 0; i < table.size(); ++i) {
        acc.add(table.log_weights[i] * expi_turns(alpha, table.phase_values[i]));
    }
    return acc.value();
}

/// Grid points evaluated per phase recurrence; every block restarts from a
/// freshly reduced phase, so the block layout (not the thread count) fixes
/// the rounding.
inline constexpr std::size_t recurrence_block = 256;

namespace detail {

// S at alpha_start + i * step, i in [0, out.size()), by multiplying each
// prime's phasor by e(step f(p)) from point to point.  The rotation is
// written out: std::complex multiplication carries NaN/inf recovery.
inline void prime_sum_block(const PrimeTable& table, double alpha_start, double step, std::span<complex> out) {
    const std::size_t len = out.size();
    std::vector<complex_sum> acc(len);
    for (std::size_t p = 0; p < table.size(); ++p) {
        const double f = table.phase_values[p];
        const double w = table.log_weights[p];
        const complex z0 = expi_turns(alpha_start, f);
        const complex rot = expi_turns(step, f);
        double zr = z0.real();
        double zi = z0.imag();
        for (std::size_t i = 0; i < len; ++i) {
            acc[i].add({w * zr, w * zi});
            const double nr = zr * rot.real() - zi * rot.imag();
            zi = zr * rot.imag() + zi * rot.real();
            zr = nr;
        }
    }
    for (std::size_t i = 0; i < len; ++i) out[i] = acc[i].value();
}

// Calls consume(block, alpha_first, values) for every recurrence block of the
// grid alpha0 + i * step, i < count.  consume runs on worker threads and must
// only write block-indexed state.
template <class Consume>
void for_each_sum_block(const PrimeTable& table, double alpha0, double step, std::size_t count, const Exec& exec,
                        Consume&& consume) {
    if (!table.has_phases()) fail(error_kind::validation, "prime table carries no phase values");
    const std::size_t blocks = block_count(count, recurrence_block);
    parallel_for_blocks(blocks, exec, [&](std::size_t b) {
        const std::size_t first = b * recurrence_block;
        const std::size_t len = std::min(recurrence_block, count - first);
        std::vector<complex> values(len);
        prime_sum_block(table, alpha0 + static_cast<double>(first) * step, step, values);
        consume(b, first, std::span<const complex>(values));
    });
}

}  // namespace detail

/// S on the uniform grid alpha0 + i * step.  Agrees with prime_exp_sum to
/// roughly 1e-13 relative; bitwise reproducible for a given grid.
inline std::vector<complex> prime_exp_sum_grid(const PrimeTable& table, double alpha0, double step,
                                               std::size_t count, const Exec& exec = {}) {
    std::vector<complex> out(count);
    detail::for_each_sum_block(table, alpha0, step, count, exec,
                               [&](std::size_t, std::size_t first, std::span<const complex> values) {
                                   std::copy(values.begin(), values.end(), out.begin() + static_cast<long>(first));
                               });
    return out;
}

struct IntegralOptions {
    std::size_t max_nodes = 100'000'000;
    double abs_tol_fraction = 1e-8;  // absolute error target as a fraction of delta2 - delta1
};

namespace detail {

inline complex panel_quadrature(const PhaseContext& ctx, double lo, double hi, double alpha, std::size_t panels) {
    const auto& gl = gauss_legendre<16>::instance();
    const double width = (hi - lo) / static_cast<double>(panels);
    complex_sum acc;
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = lo + width * static_cast<double>(p);
        const double half = 0.5 * width;
        const double mid = a + half;
        for (std::size_t i = 0; i < 16; ++i) {
            const double y = mid + half * gl.nodes[i];
            acc.add(gl.weights[i] * half * expi_turns(alpha, phase_raw(ctx, y)));
        }
    }
    return acc.value();
}

}  // namespace detail

/// I(alpha) = integral over [delta1, delta2] of e(alpha f(y)) dy.
///
/// 16-point Gauss-Legendre panels, one panel per bound on the phase
/// revolutions |alpha| max f' (delta2 - delta1) (at least four panels, so at
/// least 64 nodes and 16 nodes per revolution).  The panel count is doubled
/// until two successive results agree to the absolute target.
inline complex integral_exp_sum(const DerivedScales& scales, const PhaseContext& ctx, double alpha,
                                const IntegralOptions& options = {}) {
    const double length = scales.delta2 - scales.delta1;
    if (alpha == 0.0) return {length, 0.0};
    // f is convex on the window, so f' peaks at the right end.
    const double revolutions = std::abs(alpha) * detail::phase_derivative_raw(ctx, scales.delta2) * length;
    const auto panels0 = static_cast<std::size_t>(std::max(4.0, std::ceil(revolutions)));
    const double target = options.abs_tol_fraction * length;

    std::size_t panels = panels0;
    auto need = [&](std::size_t p) { return 16 * p; };
    if (need(2 * panels) > options.max_nodes) {
        throw budget_error("oscillatory integral I(alpha) at alpha = " + std::to_string(alpha), need(2 * panels),
                           options.max_nodes, "nodes");
    }
    complex previous = detail::panel_quadrature(ctx, scales.delta1, scales.delta2, alpha, panels);
    for (;;) {
        panels *= 2;
        const complex current = detail::panel_quadrature(ctx, scales.delta1, scales.delta2, alpha, panels);
        if (std::abs(current - previous) <= target) return current;
        if (need(2 * panels) > options.max_nodes) {
            throw budget_error("oscillatory integral I(alpha) did not settle at alpha = " + std::to_string(alpha),
                               need(2 * panels), options.max_nodes, "nodes");
        }
        previous = current;
    }
}

/// A(t) = sum over integers delta1 < n <= delta2 of e(t f(n)).
inline complex integer_exp_sum(const DerivedScales& scales, const PhaseContext& ctx, double t,
                               std::uint64_t max_terms = 100'000'000) {
    const auto first = static_cast<std::uint64_t>(std::floor(scales.delta1)) + 1;
    const auto last = static_cast<std::uint64_t>(std::floor(scales.delta2));
    const std::uint64_t count = last >= first ? last - first + 1 : 0;
    if (count > max_terms) throw budget_error("integer exponential sum A(t)", count, max_terms, "terms");
    complex_sum acc;
    for (std::uint64_t n = first; n <= last; ++n) {
        acc.add(expi_turns(t, detail::phase_raw(ctx, static_cast<double>(n))));
    }
    return acc.value();
}

/// min(|t|^{1/2} X^{c/2} + |t|^{-1} X^{1-c}, X)
inline double integer_sum_bound(const DerivedScales& scales, double c, double t) {
    const double at = std::abs(t);
    const double van_der_corput = std::sqrt(at) * std::pow(scales.X, c / 2.0) + std::pow(scales.X, 1.0 - c) / at;
    return std::min(van_der_corput, scales.X);
}

struct AlphaSample {
    double alpha = 0.0;
    complex s_value;
    complex i_value;
    double deviation = 0.0;  // |S - I| / X
};

/// S and I on the symmetric grid alpha_j = tau (2j - (n-1)) / (n-1).
inline std::vector<AlphaSample> major_arc_deviation(const PrimeTable& table, const DerivedScales& scales,
                                                    const PhaseContext& ctx, std::size_t grid_size,
                                                    const Exec& exec = {}, const IntegralOptions& options = {}) {
    if (grid_size < 3) fail(error_kind::validation, "major-arc grid needs at least 3 points");
    std::vector<AlphaSample> out(grid_size);
    const double denom = static_cast<double>(grid_size - 1);
    parallel_for_blocks(grid_size, exec, [&](std::size_t j) {
        const double numer = 2.0 * static_cast<double>(j) - denom;
        const double alpha = scales.tau * numer / denom;
        AlphaSample s;
        s.alpha = alpha;
        s.s_value = prime_exp_sum(table, alpha);
        s.i_value = integral_exp_sum(scales, ctx, alpha, options);
        s.deviation = std::abs(s.s_value - s.i_value) / scales.X;
        out[j] = s;
    });
    return out;
}

struct MeanSquareOptions {
    std::size_t min_intervals = 256;
    std::size_t max_initial_intervals = std::size_t{1} << 16;
    std::size_t max_intervals = std::size_t{1} << 22;
    double intervals_per_revolution = 8.0;
    double rel_tol = 0.005;  // agreement of successive refinements
    Exec exec{};
};

struct MeanSquareResult {
    double value = 0.0;
    std::size_t intervals = 0;
    int refinements = 0;
    bool converged = false;
};

namespace detail {

inline std::size_t initial_intervals(double revolutions, const MeanSquareOptions& o) {
    const double want = std::ceil(o.intervals_per_revolution * revolutions);
    std::size_t n = o.min_intervals;
    while (static_cast<double>(n) < want && n < o.max_initial_intervals) n *= 2;
    return n;
}

// Trapezoid rule on [a, b] for a non-negative integrand sampled through
// eval(alpha0, step, count) -> sum of samples.  Halves the step (reusing old
// samples) until two successive estimates agree to rel_tol.
template <class SampleSum>
MeanSquareResult refine_trapezoid(double a, double b, std::size_t intervals, const MeanSquareOptions& o,
                                  SampleSum&& sample_sum) {
    MeanSquareResult r;
    double h = (b - a) / static_cast<double>(intervals);
    const double ends = sample_sum(a, b - a, 2);
    double interior = intervals > 1 ? sample_sum(a + h, h, intervals - 1) : 0.0;
    double estimate = h * (0.5 * ends + interior);
    for (;;) {
        if (2 * intervals > o.max_intervals) {
            r.value = estimate;
            r.intervals = intervals;
            return r;
        }
        const double half = 0.5 * h;
        const double mids = sample_sum(a + half, h, intervals);
        interior += mids;
        intervals *= 2;
        h = half;
        const double next = h * (0.5 * ends + interior);
        ++r.refinements;
        if (std::abs(next - estimate) <= o.rel_tol * std::abs(next)) {
            r.value = next;
            r.intervals = intervals;
            r.converged = true;
            return r;
        }
        estimate = next;
    }
}

inline double sum_abs2_prime(const PrimeTable& table, double alpha0, double step, std::size_t count,
                             const Exec& exec) {
    std::vector<neumaier_sum> partial(block_count(count, recurrence_block));
    for_each_sum_block(table, alpha0, step, count, exec,
                       [&](std::size_t b, std::size_t, std::span<const complex> values) {
                           for (complex z : values) partial[b].add(std::norm(z));
                       });
    neumaier_sum total;
    for (const auto& p : partial) total.merge(p);
    return total.value();
}

}  // namespace detail

/// Trapezoid estimate of the integral of |S|^2 over [a, b].  Around
/// alpha = 0, |S|^2 has a peak of width about 1/F (F the spread of the phase
/// values), so [a, b] is cut at +-16/F and +-256/F and every piece gets its
/// own grid.  `intervals` is the total over the pieces.
inline MeanSquareResult mean_square_prime(const PrimeTable& table, double a, double b,
                                          const MeanSquareOptions& options = {}) {
    if (!table.has_phases()) fail(error_kind::validation, "prime table carries no phase values");
    if (table.empty()) return {0.0, 0, 0, true};
    const double frange = table.phase_values.back() - table.phase_values.front();
    std::vector<double> cuts{a};
    if (frange > 0.0) {
        for (double r : {-256.0, -16.0, 16.0, 256.0}) {
            if (r / frange > a && r / frange < b) cuts.push_back(r / frange);
        }
    }
    cuts.push_back(b);
    MeanSquareResult out;
    out.converged = true;
    neumaier_sum total;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        const std::size_t n0 = detail::initial_intervals((hi - lo) * frange, options);
        const MeanSquareResult piece =
            detail::refine_trapezoid(lo, hi, n0, options, [&](double alpha0, double step, std::size_t count) {
                return detail::sum_abs2_prime(table, alpha0, step, count, options.exec);
            });
        total.add(piece.value);
        out.intervals += piece.intervals;
        out.refinements = std::max(out.refinements, piece.refinements);
        out.converged = out.converged && piece.converged;
    }
    out.value = total.value();
    return out;
}

/// Integral of |S|^2 over the major arc [-tau, tau].
inline MeanSquareResult mean_square_s_major(const PrimeTable& table, const DerivedScales& scales,
                                            const MeanSquareOptions& options = {}) {
    return mean_square_prime(table, -scales.tau, scales.tau, options);
}

/// Integral of |S|^2 over the unit interval [n, n+1].
inline MeanSquareResult mean_square_s_unit(const PrimeTable& table, long n, const MeanSquareOptions& options = {}) {
    const auto a = static_cast<double>(n);
    return mean_square_prime(table, a, a + 1.0, options);
}

/// Integral of |I|^2 over the major arc [-tau, tau].
inline MeanSquareResult mean_square_i_major(const DerivedScales& scales, const PhaseContext& ctx,
                                            const MeanSquareOptions& options = {},
                                            const IntegralOptions& integral = {}) {
    const double frange = detail::phase_raw(ctx, scales.delta2) - detail::phase_raw(ctx, scales.delta1);
    const std::size_t n0 = detail::initial_intervals(2.0 * scales.tau * frange, options);
    return detail::refine_trapezoid(
        -scales.tau, scales.tau, n0, options, [&](double alpha0, double step, std::size_t count) {
            std::vector<double> values(count);
            parallel_for_blocks(count, options.exec, [&](std::size_t i) {
                values[i] = std::norm(
                    integral_exp_sum(scales, ctx, alpha0 + static_cast<double>(i) * step, integral));
            });
            return compensated_sum(std::span<const double>(values));
        });
}

enum class MeanSquareKind { s_major, i_major, s_unit };

/// Dispatch over the three mean-square integrals; `n` is used by s_unit only.
inline MeanSquareResult mean_square(MeanSquareKind kind, const PrimeTable& table, const DerivedScales& scales,
                                    const PhaseContext& ctx, long n = 0, const MeanSquareOptions& options = {}) {
    switch (kind) {
        case MeanSquareKind::s_major: return mean_square_s_major(table, scales, options);
        case MeanSquareKind::i_major: return mean_square_i_major(scales, ctx, options);
        case MeanSquareKind::s_unit: return mean_square_s_unit(table, n, options);
    }
    fail(error_kind::validation, "unknown mean-square kind");
}

inline void write_alpha_csv(std::ostream& os, const std::vector<AlphaSample>& samples) {
    os << "alpha,re_S,im_S,re_I,im_I,deviation\n";
    char buf[192];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.alpha, s.s_value.real(),
                      s.s_value.imag(), s.i_value.real(), s.i_value.imag(), s.deviation);
        os << buf;
    }
}

struct IntegerSumSample {
    double t = 0.0;
    double magnitude = 0.0;
    double bound = 0.0;
};

/// |A(t)| and its bound on `points` log-spaced t in [X^{-c}, H].
inline std::vector<IntegerSumSample> integer_sum_profile(const DerivedScales& scales, const PhaseContext& ctx,
                                                         std::size_t points, const Exec& exec = {}) {
    std::vector<IntegerSumSample> out(points);
    const double lo = std::pow(scales.X, -ctx.c);
    const double hi = scales.H;
    parallel_for_blocks(points, exec, [&](std::size_t i) {
        const double t = points == 1 ? lo
                                     : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) *
                                                                   static_cast<double>(i) /
                                                                   static_cast<double>(points - 1));
        out[i] = {t, std::abs(integer_exp_sum(scales, ctx, t)), integer_sum_bound(scales, ctx.c, t)};
    });
    return out;
}

inline void write_integer_sum_csv(std::ostream& os, const std::vector<IntegerSumSample>& samples) {
    os << "t,abs_A,bound\n";
    char buf[96];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.t, s.magnitude, s.bound);
        os << buf;
    }
}

}  // namespace tanprime

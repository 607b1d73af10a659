#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <vector>

#include "tanprime/error.hpp"
#include "tanprime/numeric.hpp"
#include "tanprime/parallel.hpp"
#include "tanprime/tangent_phase.hpp"

namespace tanprime {

/// Primes of a real window (lower, upper] with their log weights and, when
/// sieved against a phase context, their phase values f(p).
struct PrimeTable {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<std::uint64_t> primes;
    std::vector<double> log_weights;
    std::vector<double> phase_values;  // empty unless built from a PhaseContext
    double theta_sum = 0.0;

    std::size_t size() const noexcept { return primes.size(); }
    bool empty() const noexcept { return primes.empty(); }
    bool has_phases() const noexcept { return phase_values.size() == primes.size(); }
};

inline constexpr std::size_t sieve_segment_odds = std::size_t{1} << 16;

struct SieveOptions {
    // Enough segments to reach 1e8 from zero.
    std::size_t max_segments = 763;
    Exec exec{};
};

namespace detail {

inline std::vector<std::uint32_t> small_odd_primes(std::uint64_t limit) {
    std::vector<std::uint32_t> out;
    if (limit < 3) return out;
    std::vector<bool> composite(limit + 1, false);
    for (std::uint64_t i = 3; i * i <= limit; i += 2) {
        if (composite[i]) continue;
        for (std::uint64_t j = i * i; j <= limit; j += 2 * i) composite[j] = true;
    }
    for (std::uint64_t i = 3; i <= limit; i += 2) {
        if (!composite[i]) out.push_back(static_cast<std::uint32_t>(i));
    }
    return out;
}

inline std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// Odd primes in [first_odd, first_odd + 2*count), one bit per odd number.
inline void sieve_odd_segment(std::uint64_t first_odd, std::size_t count,
                              const std::vector<std::uint32_t>& base, std::vector<std::uint64_t>& out) {
    std::vector<std::uint64_t> bits((count + 63) / 64, 0);  // set bit = composite
    const std::uint64_t last = first_odd + 2 * (count - 1);
    for (std::uint32_t q : base) {
        const std::uint64_t qq = static_cast<std::uint64_t>(q) * q;
        if (qq > last) break;
        std::uint64_t start = qq;
        if (start < first_odd) {
            start = (first_odd + q - 1) / q * q;
            if (start % 2 == 0) start += q;
        }
        for (std::uint64_t v = start; v <= last; v += 2ull * q) {
            const std::uint64_t idx = (v - first_odd) / 2;
            bits[idx / 64] |= std::uint64_t{1} << (idx % 64);
        }
    }
    for (std::size_t w = 0; w < bits.size(); ++w) {
        std::uint64_t free = ~bits[w];
        while (free) {
            const int b = std::countr_zero(free);
            free &= free - 1;
            const std::size_t idx = w * 64 + static_cast<std::size_t>(b);
            if (idx >= count) break;
            const std::uint64_t v = first_odd + 2 * idx;
            if (v > 1) out.push_back(v);
        }
    }
}

}  // namespace detail

/// Segmented, odd-only, bit-packed sieve of the primes p with
/// lower < p <= upper.  The real bounds are compared exactly against the
/// integers: p > lower iff p >= floor(lower) + 1, p <= upper iff p <= floor(upper).
inline PrimeTable sieve_window(double lower, double upper, const SieveOptions& options = {}) {
    if (!(lower >= 2.0 && lower < upper) || !std::isfinite(upper)) {
        fail(error_kind::validation, "sieve window requires 2 <= lower < upper");
    }
    PrimeTable table;
    table.lower = lower;
    table.upper = upper;

    const auto first = static_cast<std::uint64_t>(std::floor(lower)) + 1;
    const auto last = static_cast<std::uint64_t>(std::floor(upper));

    const std::uint64_t first_odd = first % 2 == 0 ? first + 1 : first;
    const std::uint64_t odd_count = last >= first_odd ? (last - first_odd) / 2 + 1 : 0;
    const std::uint64_t root = detail::isqrt(last);
    const std::size_t base_segments = block_count(root / 2 + 1, sieve_segment_odds);
    const std::size_t window_segments = block_count(odd_count, sieve_segment_odds);
    if (base_segments + window_segments > options.max_segments) {
        throw budget_error("sieve window (" + std::to_string(lower) + ", " + std::to_string(upper) + "]",
                           base_segments + window_segments, options.max_segments, "segments");
    }

    if (first <= 2 && last >= 2) table.primes.push_back(2);
    if (odd_count > 0) {
        const auto base = detail::small_odd_primes(root);
        std::vector<std::vector<std::uint64_t>> parts(window_segments);
        parallel_for_blocks(window_segments, options.exec, [&](std::size_t seg) {
            const std::uint64_t seg_first = first_odd + 2 * seg * sieve_segment_odds;
            const std::size_t count = static_cast<std::size_t>(
                std::min<std::uint64_t>(sieve_segment_odds, odd_count - seg * sieve_segment_odds));
            detail::sieve_odd_segment(seg_first, count, base, parts[seg]);
        });
        for (const auto& part : parts) table.primes.insert(table.primes.end(), part.begin(), part.end());
    }

    table.log_weights.reserve(table.primes.size());
    neumaier_sum theta;
    for (std::uint64_t p : table.primes) {
        const double w = std::log(static_cast<double>(p));
        table.log_weights.push_back(w);
        theta.add(w);
    }
    table.theta_sum = theta.value();
    return table;
}

/// Sieves the phase window (domain_lo, domain_hi] and attaches f(p) to every prime.
inline PrimeTable sieve_window(const PhaseContext& ctx, const SieveOptions& options = {}) {
    PrimeTable table = sieve_window(ctx.domain_lo, ctx.domain_hi, options);
    table.phase_values.reserve(table.size());
    for (std::uint64_t p : table.primes) table.phase_values.push_back(phase_value(ctx, static_cast<double>(p)));
    return table;
}

/// Sum of log p over the table, compensated, ascending order.
inline double chebyshev_theta(const PrimeTable& table) {
    neumaier_sum s;
    for (double w : table.log_weights) s.add(w);
    return s.value();
}

/// CSV dump: prime, log_weight, phase_value (18 significant digits).
inline void write_prime_csv(std::ostream& os, const PrimeTable& table) {
    os << "prime,log_weight,phase_value\n";
    char buf[96];
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double phase = table.has_phases() ? table.phase_values[i] : std::nan("");
        std::snprintf(buf, sizeof buf, "%llu,%.18g,%.18g\n", static_cast<unsigned long long>(table.primes[i]),
                      table.log_weights[i], phase);
        os << buf;
    }
}

}  // namespace tanprime

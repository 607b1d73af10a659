#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "tanprime/error.hpp"
#include "tanprime/exp_sums.hpp"
#include "tanprime/numeric.hpp"
#include "tanprime/parallel.hpp"
#include "tanprime/prime_window.hpp"
#include "tanprime/scales.hpp"
#include "tanprime/smoothing.hpp"

namespace tanprime {

/// A solution p1 <= p2 <= p3 of |f(p1) + f(p2) + f(p3) - N| < eps, stored once
/// per multiset.  The ordered count it stands for is multiplicity().
struct WitnessTriple {
    std::uint64_t p1 = 0;
    std::uint64_t p2 = 0;
    std::uint64_t p3 = 0;
    double value = 0.0;
    double residual = 0.0;
    double weight = 0.0;  // log p1 log p2 log p3

    int multiplicity() const noexcept {
        if (p1 == p2 && p2 == p3) return 1;
        if (p1 == p2 || p2 == p3) return 3;
        return 6;
    }

    friend bool operator==(const WitnessTriple& a, const WitnessTriple& b) {
        return a.p1 == b.p1 && a.p2 == b.p2 && a.p3 == b.p3 && a.value == b.value && a.residual == b.residual &&
               a.weight == b.weight;
    }
    friend bool operator<(const WitnessTriple& a, const WitnessTriple& b) {
        return std::tie(a.p1, a.p2, a.p3) < std::tie(b.p1, b.p2, b.p3);
    }
};

inline constexpr std::size_t brute_force_max_primes = 500;

namespace detail {

inline double triple_value(double f1, double f2, double f3) { return compensated_sum({f1, f2, f3}); }

inline double triple_residual(double f1, double f2, double f3, double n) {
    return compensated_sum({f1, f2, f3, -n});
}

// Strict: a residual of exactly eps is not a solution.
inline bool within(double residual, double eps) { return std::abs(residual) < eps; }

inline WitnessTriple make_witness(const PrimeTable& t, std::size_t i, std::size_t j, std::size_t k, double n) {
    const auto& f = t.phase_values;
    const auto& w = t.log_weights;
    return {t.primes[i], t.primes[j], t.primes[k], triple_value(f[i], f[j], f[k]),
            triple_residual(f[i], f[j], f[k], n), w[i] * w[j] * w[k]};
}

inline void require_phases(const PrimeTable& t) {
    if (!t.has_phases()) fail(error_kind::validation, "prime table carries no phase values");
}

// For a fixed first index i, visits every (j, k) with i <= j <= k whose
// residual passes the strict test.  The admissible f(p3) range is bracketed
// with a few-ulp margin and every candidate is re-tested with the compensated
// residual, so the result matches an exhaustive scan exactly.  The upper
// bracket end only moves down as j grows, so it is tracked by a pointer.
template <class Visit>
void scan_pairs(std::span<const double> f, std::size_t i, double n, double eps, Visit&& visit) {
    const std::size_t size = f.size();
    const double margin = 64.0 * DBL_EPSILON * (std::abs(n) + eps);
    const double f1 = f[i];
    std::size_t k_end = size;
    bool bracketed = false;
    for (std::size_t j = i; j < size; ++j) {
        const double f2 = f[j];
        const double upper = (n + eps) - f1 - f2 + margin;
        if (upper < f2) break;
        const double lower = (n - eps) - f1 - f2 - margin;
        if (!bracketed) {
            k_end = static_cast<std::size_t>(std::upper_bound(f.begin() + static_cast<long>(j), f.end(), upper) -
                                             f.begin());
            bracketed = true;
        } else {
            while (k_end > j && f[k_end - 1] > upper) --k_end;
        }
        for (std::size_t k = k_end; k > j;) {
            --k;
            if (f[k] < lower) break;
            const double r = triple_residual(f1, f2, f[k], n);
            if (within(r, eps)) visit(j, k, r);
        }
    }
}

inline constexpr std::size_t first_index_block = 16;

}  // namespace detail

/// Exhaustive scan over all multisets {p1 <= p2 <= p3}; the reference result.
inline std::vector<WitnessTriple> brute_force_search(const PrimeTable& table, double n, double eps) {
    detail::require_phases(table);
    if (table.size() > brute_force_max_primes) {
        throw budget_error("brute-force witness search", table.size(), brute_force_max_primes, "primes");
    }
    std::vector<WitnessTriple> out;
    const auto& f = table.phase_values;
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (std::size_t j = i; j < table.size(); ++j) {
            for (std::size_t k = j; k < table.size(); ++k) {
                if (detail::within(detail::triple_residual(f[i], f[j], f[k], n), eps)) {
                    out.push_back(detail::make_witness(table, i, j, k, n));
                }
            }
        }
    }
    return out;
}

/// For every pair p1 <= p2, brackets the sorted phase values for the p3 >= p2
/// that complete a solution.  Returns the same canonical list as
/// brute_force_search, in ascending (p1, p2, p3) order.
inline std::vector<WitnessTriple> search_meet_in_middle(const PrimeTable& table, double n, double eps,
                                                        const Exec& exec = {}) {
    detail::require_phases(table);
    const std::span<const double> f(table.phase_values);
    const std::size_t blocks = block_count(table.size(), detail::first_index_block);
    std::vector<std::vector<WitnessTriple>> parts(blocks);
    parallel_for_blocks(blocks, exec, [&](std::size_t b) {
        const std::size_t end = std::min(table.size(), (b + 1) * detail::first_index_block);
        for (std::size_t i = b * detail::first_index_block; i < end; ++i) {
            detail::scan_pairs(f, i, n, eps, [&](std::size_t j, std::size_t k, double) {
                parts[b].push_back(detail::make_witness(table, i, j, k, n));
            });
        }
        std::sort(parts[b].begin(), parts[b].end());
    });
    std::vector<WitnessTriple> out;
    for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
    return out;
}

/// Sharp and smoothed weighted counts, both summed over ordered triples.
struct GammaCounts {
    std::size_t witness_count = 0;          // multisets
    std::size_t ordered_witness_count = 0;  // ordered triples
    double gamma_sharp = 0.0;
    double gamma0_direct = 0.0;
};

namespace detail {

inline GammaCounts count_triples(const PrimeTable& table, double n, double eps, const SmoothingKernel* kernel,
                                 const Exec& exec) {
    require_phases(table);
    const std::span<const double> f(table.phase_values);
    const auto& w = table.log_weights;
    const std::size_t blocks = block_count(table.size(), first_index_block);
    struct Partial {
        std::size_t count = 0;
        std::size_t ordered = 0;
        neumaier_sum sharp;
        neumaier_sum smooth;
    };
    std::vector<Partial> parts(blocks);
    parallel_for_blocks(blocks, exec, [&](std::size_t b) {
        Partial& part = parts[b];
        const std::size_t end = std::min(table.size(), (b + 1) * first_index_block);
        for (std::size_t i = b * first_index_block; i < end; ++i) {
            scan_pairs(f, i, n, eps, [&](std::size_t j, std::size_t k, double residual) {
                const int mult = (i == j && j == k) ? 1 : (i == j || j == k) ? 3 : 6;
                const double weight = mult * (w[i] * w[j] * w[k]);
                ++part.count;
                part.ordered += static_cast<std::size_t>(mult);
                part.sharp.add(weight);
                if (kernel) part.smooth.add(weight * psi_eval(*kernel, residual));
            });
        }
    });
    GammaCounts out;
    neumaier_sum sharp;
    neumaier_sum smooth;
    for (const auto& part : parts) {
        out.witness_count += part.count;
        out.ordered_witness_count += part.ordered;
        sharp.merge(part.sharp);
        smooth.merge(part.smooth);
    }
    out.gamma_sharp = sharp.value();
    out.gamma0_direct = smooth.value();
    return out;
}

}  // namespace detail

/// gamma_sharp sums log-weights over solutions with |residual| < kernel.epsilon;
/// gamma0_direct weights every triple by psi(residual).  psi vanishes outside
/// (-eps, eps), so the same bracketed scan covers both.
inline GammaCounts gamma_counts(const PrimeTable& table, const SmoothingKernel& kernel, double n,
                                const Exec& exec = {}) {
    return detail::count_triples(table, n, kernel.epsilon, &kernel, exec);
}

/// As above, rejecting a kernel built for a different epsilon than the scales.
inline GammaCounts gamma_counts(const PrimeTable& table, const SmoothingKernel& kernel, const DerivedScales& scales,
                                double n, const Exec& exec = {}) {
    if (std::abs(kernel.epsilon - scales.epsilon) > 1e-12 * scales.epsilon) {
        fail(error_kind::validation, "kernel epsilon " + std::to_string(kernel.epsilon) +
                                         " does not match the scale epsilon " + std::to_string(scales.epsilon));
    }
    return gamma_counts(table, kernel, n, exec);
}

/// Sharp count only (no kernel).
inline GammaCounts sharp_counts(const PrimeTable& table, double n, double eps, const Exec& exec = {}) {
    return detail::count_triples(table, n, eps, nullptr, exec);
}

/// Kernel used for the Fourier-side computation: order k = ceil(log X).
inline SmoothingKernel fourier_kernel(const DerivedScales& scales) {
    return make_kernel(scales.epsilon, static_cast<int>(std::ceil(scales.log_X)));
}

/// Tail bound X^3 (4k / (pi eps H))^k for the part of the integral beyond |alpha| = H.
inline double gamma3_tail_bound(const SmoothingKernel& kernel, const DerivedScales& scales) {
    const double base = 4.0 * kernel.k / (std::numbers::pi * kernel.epsilon * scales.H);
    return std::exp(3.0 * scales.log_X + kernel.k * std::log(base));
}

struct QuadratureGrid {
    double nodes_per_revolution = 8.0;  // guard: at least 8 per turn of the fastest triple phase
    double rel_tol = 0.005;             // successive refinements must agree this closely
    int max_refinements = 6;
    std::size_t max_nodes = 200'000'000;
    bool full_line = false;          // also integrate out to a cutoff where the kernel tail is negligible
    double full_line_rel_tail = 1e-3;  // tail bound target relative to gamma0_direct
    double full_line_reference = 0.0;  // |gamma0_direct| used to place the cutoff
};

struct Gamma0Integral {
    double gamma1 = 0.0;  // |alpha| <= tau
    double gamma2 = 0.0;  // tau <= |alpha| <= H
    double gamma3_bound = 0.0;
    double total = 0.0;  // gamma1 + gamma2
    int kernel_k = 0;
    double node_spacing = 0.0;
    std::size_t nodes = 0;
    int refinements = 0;
    bool converged = false;
    // Diagnostic: the same integral carried out to |alpha| <= full_line_cutoff,
    // whose remaining tail is bounded by full_line_tail_bound.
    bool full_line_performed = false;
    double full_line_cutoff = 0.0;
    double full_line_value = 0.0;
    double full_line_tail_bound = 0.0;
};

namespace detail {

// 2 Re of the Simpson estimate of the integral over [a, b] of
// S^3(alpha) Psi(alpha) e(-N alpha), with `intervals` (even) subintervals.
inline double simpson_gamma_segment(const PrimeTable& table, const SmoothingKernel& kernel, double n, double a,
                                    double b, std::size_t intervals, const Exec& exec) {
    if (intervals == 0 || b <= a) return 0.0;
    const double h = (b - a) / static_cast<double>(intervals);
    std::vector<neumaier_sum> partial(block_count(intervals + 1, recurrence_block));
    for_each_sum_block(table, a, h, intervals + 1, exec,
                       [&](std::size_t blk, std::size_t first, std::span<const complex> values) {
                           for (std::size_t off = 0; off < values.size(); ++off) {
                               const std::size_t idx = first + off;
                               const double alpha = a + static_cast<double>(idx) * h;
                               const complex s = values[off];
                               const complex g = s * s * s * psi_fourier(kernel, alpha) * expi_turns(alpha, -n);
                               const double weight = (idx == 0 || idx == intervals) ? 1.0 : (idx % 2 ? 4.0 : 2.0);
                               partial[blk].add(weight * g.real());
                           }
                       });
    neumaier_sum total;
    for (const auto& p : partial) total.merge(p);
    return 2.0 * h / 3.0 * total.value();
}

inline std::size_t even_intervals(double length, double spacing) {
    auto n = static_cast<std::size_t>(std::ceil(length / spacing));
    if (n < 2) n = 2;
    if (n % 2) ++n;
    return n;
}

}  // namespace detail

/// 2 Re of the Simpson integral over [0, cutoff] of cube(alpha) Psi(alpha) e(-N alpha)
/// for any callable cube (the prime sum S^3 in production; a constant in tests).
template <class Cube>
double gamma0_line_integral(const SmoothingKernel& kernel, double n, double cutoff, double spacing, Cube&& cube) {
    const std::size_t intervals = detail::even_intervals(cutoff, spacing);
    const double h = cutoff / static_cast<double>(intervals);
    neumaier_sum total;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double alpha = static_cast<double>(i) * h;
        const complex g = complex(cube(alpha)) * psi_fourier(kernel, alpha) * expi_turns(alpha, -n);
        const double weight = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        total.add(weight * g.real());
    }
    return 2.0 * h / 3.0 * total.value();
}

/// The smoothed count from the frequency side: the integral of
/// S^3 Psi e(-N alpha) over |alpha| <= tau (gamma1) and tau <= |alpha| <= H
/// (gamma2), with the analytic bound for |alpha| > H.  The integrand is
/// conjugate-symmetric, so only alpha >= 0 is sampled.  Composite Simpson with
/// the node spacing halved until successive totals agree to rel_tol.
inline Gamma0Integral gamma0_via_integral(const PrimeTable& table, const SmoothingKernel& kernel,
                                          const DerivedScales& scales, double n, const QuadratureGrid& grid = {},
                                          const Exec& exec = {}) {
    detail::require_phases(table);
    if (!(grid.nodes_per_revolution >= 8.0)) {
        fail(error_kind::quadrature, "grid must place at least 8 nodes per revolution of the triple phase");
    }
    Gamma0Integral out;
    out.kernel_k = kernel.k;
    out.gamma3_bound = gamma3_tail_bound(kernel, scales);
    if (table.empty()) {
        out.converged = true;
        return out;
    }
    const auto& f = table.phase_values;
    const double fastest = std::max(std::abs(3.0 * f.back() - n), std::abs(3.0 * f.front() - n));
    double h = 1.0 / (grid.nodes_per_revolution * std::max(fastest, 1.0));

    auto evaluate = [&](double spacing, std::size_t& nodes) {
        const std::size_t n1 = detail::even_intervals(scales.tau, spacing);
        const std::size_t n2 = detail::even_intervals(scales.H - scales.tau, spacing);
        nodes = n1 + n2 + 2;
        if (nodes > grid.max_nodes) return std::pair{std::nan(""), std::nan("")};
        return std::pair{detail::simpson_gamma_segment(table, kernel, n, 0.0, scales.tau, n1, exec),
                         detail::simpson_gamma_segment(table, kernel, n, scales.tau, scales.H, n2, exec)};
    };

    std::size_t nodes = 0;
    auto [g1, g2] = evaluate(h, nodes);
    if (std::isnan(g1)) {
        throw budget_error("gamma0 integral grid", nodes, grid.max_nodes, "nodes");
    }
    for (int r = 0; r < grid.max_refinements; ++r) {
        std::size_t finer_nodes = 0;
        const auto [f1, f2] = evaluate(0.5 * h, finer_nodes);
        if (std::isnan(f1)) break;
        const double prev = g1 + g2;
        g1 = f1;
        g2 = f2;
        h *= 0.5;
        nodes = finer_nodes;
        out.refinements = r + 1;
        if (std::abs((g1 + g2) - prev) <= grid.rel_tol * std::abs(g1 + g2)) {
            out.converged = true;
            break;
        }
    }
    out.gamma1 = g1;
    out.gamma2 = g2;
    out.total = g1 + g2;
    out.node_spacing = h;
    out.nodes = nodes;

    if (grid.full_line && grid.full_line_reference > 0.0) {
        // 2 theta^3 (4k / (pi eps A))^k / (pi k) <= rel * reference, with |S| <= theta.
        const double theta3 = std::pow(table.theta_sum, 3.0);
        const double allowed = grid.full_line_rel_tail * grid.full_line_reference;
        const double cutoff =
            std::max(scales.H, 4.0 * kernel.k / (std::numbers::pi * kernel.epsilon) *
                                   std::pow(2.0 * theta3 / (std::numbers::pi * kernel.k * allowed), 1.0 / kernel.k));
        const std::size_t intervals = detail::even_intervals(cutoff, h);
        if (intervals + 1 <= grid.max_nodes) {
            out.full_line_performed = true;
            out.full_line_cutoff = cutoff;
            out.full_line_tail_bound = fourier_tail_integral(kernel, cutoff, theta3);
            out.full_line_value = detail::simpson_gamma_segment(table, kernel, n, 0.0, cutoff, intervals, exec);
        }
    }
    return out;
}

struct ScalingRow {
    long m = 0;
    double X = 0.0;
    double epsilon = 0.0;
    std::size_t prime_count = 0;
    std::size_t witness_count = 0;
    double gamma_sharp = 0.0;
    double theta_prediction = 0.0;  // eps X^{3-c}
    double ratio = 0.0;
};

/// gamma_sharp / (eps X^{3-c}) for each window index, with N = N_induced.
inline std::vector<ScalingRow> scaling_probe(const ProblemConfig& config, std::span<const long> m_list,
                                             const Exec& exec = {}, SieveOptions sieve = {}) {
    std::vector<ScalingRow> rows;
    sieve.exec = exec;
    for (long m : m_list) {
        ProblemConfig at_m{config.c, config.theta, WindowIndex{m}};
        const DerivedScales s = derive_scales(at_m);
        const PhaseContext ctx = PhaseContext::from(at_m, s);
        const PrimeTable table = sieve_window(ctx, sieve);
        const GammaCounts counts = sharp_counts(table, s.N_induced, s.epsilon, exec);
        ScalingRow row;
        row.m = m;
        row.X = s.X;
        row.epsilon = s.epsilon;
        row.prime_count = table.size();
        row.witness_count = counts.witness_count;
        row.gamma_sharp = counts.gamma_sharp;
        row.theta_prediction = s.epsilon * std::pow(s.X, 3.0 - config.c);
        row.ratio = row.gamma_sharp / row.theta_prediction;
        rows.push_back(row);
    }
    return rows;
}

/// Options for a full search run on one window.
struct SearchOptions {
    std::optional<double> epsilon;  // defaults to the scale epsilon
    std::optional<int> kernel_k;    // defaults to ceil(log X)
    bool integral = false;          // also compute gamma0 from the frequency side
    QuadratureGrid grid{};
    SieveOptions sieve{};
    Exec exec{};
};

struct SearchReport {
    ProblemConfig config;
    DerivedScales scales;
    double target = 0.0;  // N the triples are measured against
    double epsilon = 0.0;
    int kernel_k = 0;
    std::size_t prime_count = 0;
    std::size_t witness_count = 0;
    std::size_t ordered_witness_count = 0;
    double gamma_sharp = 0.0;
    double gamma0_direct = 0.0;
    std::optional<Gamma0Integral> integral;
    double theta_prediction = 0.0;  // eps X^{3-c}
};

struct SearchRun {
    SearchReport report;
    std::vector<WitnessTriple> witnesses;
};

/// Sieves the window of `config`, lists the witnesses for N (the requested N,
/// or N_induced for a window index) and fills every count of the report.
inline SearchRun search_window(const ProblemConfig& config, const SearchOptions& options = {}) {
    SearchRun run;
    SearchReport& r = run.report;
    r.config = config;
    r.scales = derive_scales(config);
    r.target = r.scales.N_requested.value_or(r.scales.N_induced);
    r.epsilon = options.epsilon.value_or(r.scales.epsilon);
    if (!(r.epsilon >= 0.0) || !std::isfinite(r.epsilon)) {
        fail(error_kind::validation, "search epsilon must be finite and non-negative");
    }
    r.kernel_k = options.kernel_k.value_or(static_cast<int>(std::ceil(r.scales.log_X)));
    r.theta_prediction = r.scales.epsilon * std::pow(r.scales.X, 3.0 - config.c);

    SieveOptions sieve = options.sieve;
    sieve.exec = options.exec;
    const PhaseContext ctx = PhaseContext::from(config, r.scales);
    const PrimeTable table = sieve_window(ctx, sieve);
    r.prime_count = table.size();

    run.witnesses = search_meet_in_middle(table, r.target, r.epsilon, options.exec);
    if (r.epsilon > 0.0) {
        const SmoothingKernel kernel = make_kernel(r.epsilon, r.kernel_k);
        const GammaCounts counts = gamma_counts(table, kernel, r.target, options.exec);
        r.witness_count = counts.witness_count;
        r.ordered_witness_count = counts.ordered_witness_count;
        r.gamma_sharp = counts.gamma_sharp;
        r.gamma0_direct = counts.gamma0_direct;
        if (options.integral) {
            QuadratureGrid grid = options.grid;
            if (grid.full_line && grid.full_line_reference <= 0.0) grid.full_line_reference = r.gamma0_direct;
            r.integral = gamma0_via_integral(table, kernel, r.scales, r.target, grid, options.exec);
        }
    }
    return run;
}

}  // namespace tanprime

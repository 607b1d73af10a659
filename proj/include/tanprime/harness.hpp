#pragma once

#include <cmath>
#include <ostream>
#include <vector>

#include "tanprime/exp_sums.hpp"
#include "tanprime/prime_window.hpp"
#include "tanprime/report.hpp"
#include "tanprime/scales.hpp"
#include "tanprime/smoothing.hpp"
#include "tanprime/tangent_phase.hpp"
#include "tanprime/witness_search.hpp"

namespace tanprime {

// Each *_document function runs one subcommand, streams its CSV/JSONL output
// and returns the JSON summary.  Outputs depend only on the arguments, never
// on the thread count.

inline json derive_document(const ProblemConfig& config) {
    const DerivedScales scales = derive_scales(config);
    json j;
    j["config"] = to_json(config);
    j["scales"] = to_json(scales);
    j["geometry"] = to_json(window_geometry(config, scales));
    return j;
}

inline json sieve_document(const ProblemConfig& config, const SieveOptions& options, std::ostream* csv) {
    const DerivedScales scales = derive_scales(config);
    const PrimeTable table = sieve_window(PhaseContext::from(config, scales), options);
    if (csv) write_prime_csv(*csv, table);
    json j;
    j["config"] = to_json(config);
    j["scales"] = to_json(scales);
    j["options"] = {{"max_segments", options.max_segments}};
    j["prime_count"] = table.size();
    j["first_prime"] = table.empty() ? json(nullptr) : json(table.primes.front());
    j["last_prime"] = table.empty() ? json(nullptr) : json(table.primes.back());
    j["theta_sum"] = table.theta_sum;
    return j;
}

struct ExpsumOptions {
    std::size_t grid_size = 257;
    std::size_t integer_points = 64;
    bool mean_square = false;
    Exec exec{};
};

/// X^{2-c} log^3 X, the size of the major-arc mean square of S.
inline double major_mean_square_scale(const DerivedScales& s, double c) {
    return std::pow(s.X, 2.0 - c) * std::pow(s.log_X, 3.0);
}

/// X log^3 X, the size of the mean square of S over a unit interval.
inline double unit_mean_square_scale(const DerivedScales& s) { return s.X * std::pow(s.log_X, 3.0); }

/// The unit intervals [n, n+1] probed: n = 0, 1 and floor(1 / eps).
inline std::vector<long> unit_interval_starts(const DerivedScales& s) {
    return {0, 1, static_cast<long>(std::floor(1.0 / s.epsilon))};
}

inline json expsum_document(const ProblemConfig& config, const ExpsumOptions& options, std::ostream& alpha_csv,
                            std::ostream* integer_csv) {
    if (options.grid_size < 3) fail(error_kind::validation, "grid size must be at least 3");
    const DerivedScales scales = derive_scales(config);
    const PhaseContext ctx = PhaseContext::from(config, scales);
    SieveOptions sieve;
    sieve.exec = options.exec;
    const PrimeTable table = sieve_window(ctx, sieve);

    const auto samples = major_arc_deviation(table, scales, ctx, options.grid_size, options.exec);
    write_alpha_csv(alpha_csv, samples);
    double max_dev = 0.0;
    for (const auto& s : samples) max_dev = std::max(max_dev, s.deviation);

    json j;
    j["config"] = to_json(config);
    j["scales"] = to_json(scales);
    j["options"] = {{"grid_size", options.grid_size},
                    {"integer_points", options.integer_points},
                    {"mean_square", options.mean_square}};
    j["prime_count"] = table.size();
    j["max_deviation"] = max_dev;
    j["deviation_at_zero"] = options.grid_size % 2 ? json(samples[options.grid_size / 2].deviation) : json(nullptr);

    if (integer_csv) {
        const auto profile = integer_sum_profile(scales, ctx, options.integer_points, options.exec);
        write_integer_sum_csv(*integer_csv, profile);
        double worst = 0.0;
        for (const auto& p : profile) worst = std::max(worst, p.magnitude / p.bound);
        j["integer_sum_max_ratio"] = worst;
    }

    if (options.mean_square) {
        MeanSquareOptions ms;
        ms.exec = options.exec;
        const auto s_major = mean_square_s_major(table, scales, ms);
        const auto i_major = mean_square_i_major(scales, ctx, ms);
        json m;
        m["s_major"] = to_json(s_major);
        m["s_major_ratio"] = s_major.value / major_mean_square_scale(scales, config.c);
        m["i_major"] = to_json(i_major);
        json units = json::array();
        for (long n : unit_interval_starts(scales)) {
            const auto u = mean_square_s_unit(table, n, ms);
            json e = to_json(u);
            e["n"] = n;
            e["ratio"] = u.value / unit_mean_square_scale(scales);
            units.push_back(e);
        }
        m["s_unit"] = units;
        j["mean_square"] = m;
    }
    return j;
}

inline json kernel_document(double epsilon, int k, std::size_t samples, std::size_t sweep, std::ostream* psi_csv,
                            std::ostream* fourier_csv) {
    const SmoothingKernel kernel = make_kernel(epsilon, k);
    if (psi_csv) write_kernel_csv(*psi_csv, kernel, samples);
    if (fourier_csv) write_fourier_csv(*fourier_csv, kernel, sweep);
    std::size_t violations = 0;
    double worst = 0.0;
    for (double x : log_grid(1e-3 / epsilon, 1e6 / epsilon, sweep)) {
        const double ratio = std::abs(psi_fourier(kernel, x)) / fourier_bound(kernel, x);
        worst = std::max(worst, ratio);
        if (ratio > 1.0) ++violations;
    }
    json j;
    j["epsilon"] = kernel.epsilon;
    j["k"] = kernel.k;
    j["a"] = kernel.a;
    j["delta"] = kernel.delta;
    j["samples"] = samples;
    j["sweep"] = sweep;
    j["max_bound_ratio"] = worst;
    j["bound_violations"] = violations;
    return j;
}

inline json search_document(const ProblemConfig& config, const SearchOptions& options, std::ostream* jsonl) {
    const SearchRun run = search_window(config, options);
    if (jsonl) write_witness_jsonl(*jsonl, run.witnesses);
    json j = to_json(run.report);
    j["options"] = {{"epsilon", options.epsilon ? json(*options.epsilon) : json(nullptr)},
                    {"kernel_k", options.kernel_k ? json(*options.kernel_k) : json(nullptr)},
                    {"integral", options.integral},
                    {"full_line", options.grid.full_line},
                    {"nodes_per_revolution", options.grid.nodes_per_revolution},
                    {"rel_tol", options.grid.rel_tol},
                    {"max_nodes", options.grid.max_nodes},
                    {"max_segments", options.sieve.max_segments}};
    return j;
}

inline json scaling_document(const ProblemConfig& config, std::span<const long> m_list, const Exec& exec,
                             std::ostream* csv) {
    const auto rows = scaling_probe(config, m_list, exec);
    if (csv) write_scaling_csv(*csv, rows);
    json j;
    j["config"] = {{"c", config.c}, {"theta", config.theta}};
    j["m_list"] = std::vector<long>(m_list.begin(), m_list.end());
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({{"m", r.m},
                       {"X", r.X},
                       {"witness_count", r.witness_count},
                       {"gamma_sharp", r.gamma_sharp},
                       {"theta_prediction", r.theta_prediction},
                       {"ratio", r.ratio}});
    }
    j["rows"] = out;
    return j;
}

}  // namespace tanprime

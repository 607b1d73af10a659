#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tanprime/error.hpp"
#include "tanprime/exp_sums.hpp"
#include "tanprime/harness.hpp"
#include "tanprime/numeric.hpp"
#include "tanprime/prime_window.hpp"
#include "tanprime/reference_values.hpp"
#include "tanprime/scales.hpp"
#include "tanprime/smoothing.hpp"
#include "tanprime/tangent_phase.hpp"
#include "tanprime/witness_search.hpp"

namespace tanprime {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;  // check passed and finished inside the time limit
    bool check_passed = false;
    std::string measured;
    std::string threshold;
    double seconds = 0.0;
    double time_limit = 0.0;
};

struct BatteryOptions {
    Exec exec{};
    std::ostream* progress = nullptr;
};

inline constexpr int criterion_count = 10;

/// Criteria cheap enough for a quick run.
inline const std::vector<int>& quick_criteria() {
    static const std::vector<int> ids{1, 2, 3, 4, 9, 10};
    return ids;
}

namespace detail {

inline std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

struct CheckOutcome {
    bool ok = false;
    std::string measured;
    std::string threshold;
};

inline std::mt19937_64 battery_rng(std::uint64_t stream) { return std::mt19937_64(0x5eed'7a9e'0000ull + stream); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline ProblemConfig random_config(std::mt19937_64& rng, long m_lo, long m_hi) {
    const double c = uniform(rng, 1.001, c_upper - 0.001);
    const double theta = uniform(rng, 1.01, 5.0);
    const long m = std::uniform_int_distribution<long>(m_lo, m_hi)(rng);
    return {c, theta, WindowIndex{m}};
}

inline CheckOutcome check_scales(const BatteryOptions&) {
    const DerivedScales s = scales_for_window(reference::c, reference::theta, reference::m);
    double worst = 0.0;
    for (auto [got, want] : {std::pair{s.X, reference::X}, {s.epsilon, reference::epsilon}, {s.tau, reference::tau},
                             {s.H, reference::H}, {s.delta1, reference::delta1}, {s.delta2, reference::delta2},
                             {s.N_induced, reference::N_induced}}) {
        worst = std::max(worst, rel_err(got, want));
    }
    bool chain = true;
    for (const auto& b : reference::lambda_bounds) {
        const ProblemConfig config{reference::c, b.theta, WindowIndex{reference::m}};
        const DerivedScales sc = derive_scales(config);
        const WindowGeometry g = window_geometry(config, sc);
        worst = std::max({worst, rel_err(g.lambda_lo, b.lo), rel_err(g.lambda_hi, b.hi)});
        chain = chain && 4.0 / 9.0 < 1.5 && 1.5 < g.lambda_lo && g.lambda_lo < g.lambda && g.lambda < g.mu &&
                g.mu < g.lambda_hi && g.lambda_hi < 2.0 && sc.delta1 < g.delta_lambda &&
                g.delta_lambda < g.delta_mu && g.delta_mu < sc.delta2;
    }
    return {worst <= 1e-12 && chain,
            fmt("max rel err %.2e (7 scales, 6 lambda bounds); chain %s for theta 1.5, 2, 3", worst,
                chain ? "holds" : "VIOLATED"),
            "rel err <= 1e-12; strict chain"};
}

inline CheckOutcome check_phase(const BatteryOptions&) {
    auto rng = battery_rng(2);
    double d1 = 0.0;
    double d2 = 0.0;
    double induced = 0.0;
    double trip = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const ProblemConfig config = random_config(rng, 1, 6);
        const DerivedScales s = derive_scales(config);
        const PhaseContext ctx = PhaseContext::from(config, s);
        const double lo = std::log(s.delta1 * (1.0 + 1e-3));
        const double hi = std::log(s.delta2 * (1.0 - 1e-3));
        const double y = std::exp(uniform(rng, lo, hi));
        const double h1 = y * 1e-6;
        const double fd1 = (phase_value(ctx, y + h1) - phase_value(ctx, y - h1)) / (2.0 * h1);
        d1 = std::max(d1, rel_err(fd1, phase_derivative(ctx, y)));
        const double h2 = y * 1e-4;
        const double fd2 =
            (phase_value(ctx, y + h2) - 2.0 * phase_value(ctx, y) + phase_value(ctx, y - h2)) / (h2 * h2);
        d2 = std::max(d2, rel_err(fd2, phase_second_derivative(ctx, y)));
        induced = std::max(induced, rel_err(3.0 * phase_value(ctx, s.X), s.N_induced));
        for (int r = 0; r < 10; ++r) {
            const double z = std::exp(uniform(rng, std::log(s.delta1), std::log(s.delta2)));
            if (!(z > s.delta1 && z <= s.delta2)) continue;
            trip = std::max(trip, rel_err(invert_phase(ctx, phase_value(ctx, z)), z));
        }
    }
    return {d1 <= 1e-6 && d2 <= 1e-4 && induced <= 1e-12 && trip <= 1e-10,
            fmt("f' rel %.2e, f'' rel %.2e, N_induced vs 3f(X) %.2e, inverse round trip %.2e", d1, d2, induced,
                trip),
            "1e-6, 1e-4, 1e-12, 1e-10"};
}

// 2 * integral over [0, eps] of psi(y) cos(2 pi x y), Gauss-Legendre panels
// split at the spline knots.
inline double kernel_transform_by_quadrature(const SmoothingKernel& kernel, double x) {
    const auto& gl = gauss_legendre<16>::instance();
    auto panels = [&](double a, double b, int count) {
        neumaier_sum acc;
        const double w = (b - a) / count;
        for (int p = 0; p < count; ++p) {
            const double lo = a + w * p;
            for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                const double y = lo + 0.5 * w * (gl.nodes[i] + 1.0);
                acc.add(0.5 * w * gl.weights[i] * psi_eval(kernel, y) * std::cos(2.0 * std::numbers::pi * x * y));
            }
        }
        return acc.value();
    };
    neumaier_sum total;
    total.add(panels(0.0, 0.75 * kernel.epsilon, 64));
    for (int j = kernel.k; j > 0; --j) {
        total.add(panels(kernel.epsilon - j * kernel.delta, kernel.epsilon - (j - 1) * kernel.delta, 8));
    }
    return 2.0 * total.value();
}

inline CheckOutcome check_kernel(const BatteryOptions&) {
    const double eps = reference::epsilon;
    std::size_t violations = 0;
    std::size_t points = 0;
    double mass = 0.0;
    double quad = 0.0;
    for (int k : {1, 2, 5, 20}) {
        const SmoothingKernel kernel = make_kernel(eps, k);
        for (double x : log_grid(1e-3 / eps, 1e6 / eps, 10'000)) {
            ++points;
            if (std::abs(psi_fourier(kernel, x)) > fourier_bound(kernel, x)) ++violations;
        }
        mass = std::max(mass, rel_err(psi_fourier(kernel, 0.0), 7.0 * eps / 4.0));
        for (double x : {0.1 / eps, 1.0 / eps, 10.0 / eps}) {
            quad = std::max(quad, std::abs(kernel_transform_by_quadrature(kernel, x) - psi_fourier(kernel, x)));
        }
    }
    return {violations == 0 && mass <= 1e-12 && quad <= 1e-8,
            fmt("%zu/%zu bound violations; Psi(0) rel err %.2e; quadrature abs err %.2e", violations, points, mass,
                quad),
            "0 violations, 1e-12, 1e-8"};
}

inline CheckOutcome check_search_equivalence(const BatteryOptions& options) {
    auto rng = battery_rng(4);
    int cases = 0;
    int identical = 0;
    std::size_t witnesses = 0;
    while (cases < 60) {
        const ProblemConfig config = random_config(rng, 1, 2);
        const DerivedScales s = derive_scales(config);
        const PrimeTable table = sieve_window(PhaseContext::from(config, s));
        if (table.empty() || table.size() > brute_force_max_primes) continue;
        const auto& f = table.phase_values;
        const double eps = cases % 10 == 9 ? 0.0 : s.epsilon * std::pow(10.0, uniform(rng, -2.0, 1.0));
        double n = 0.0;
        if (cases % 2 == 0) {
            std::uniform_int_distribution<std::size_t> pick(0, table.size() - 1);
            n = f[pick(rng)] + f[pick(rng)] + f[pick(rng)] + uniform(rng, -1.0, 1.0) * eps;
        } else {
            n = uniform(rng, 3.0 * f.front() - eps, 3.0 * f.back() + eps);
        }
        const auto brute = brute_force_search(table, n, eps);
        const auto fast = search_meet_in_middle(table, n, eps, options.exec);
        ++cases;
        if (brute == fast) ++identical;
        witnesses += brute.size();
    }
    return {identical == cases,
            fmt("%d/%d randomized cases identical (%zu witnesses in total)", identical, cases, witnesses),
            "all cases identical, >= 50 cases"};
}

inline CheckOutcome check_witness_existence(const BatteryOptions& options) {
    bool ok = true;
    std::string measured;
    for (long m : {2L, 3L, 4L}) {
        const ProblemConfig config{1.01, 2.0, WindowIndex{m}};
        const DerivedScales s = derive_scales(config);
        SieveOptions sieve;
        sieve.exec = options.exec;
        const PrimeTable table = sieve_window(PhaseContext::from(config, s), sieve);
        const auto found = search_meet_in_middle(table, s.N_induced, s.epsilon, options.exec);
        const bool strict = std::all_of(found.begin(), found.end(),
                                        [&](const WitnessTriple& w) { return std::abs(w.residual) < s.epsilon; });
        const GammaCounts counts = sharp_counts(table, s.N_induced, s.epsilon, options.exec);
        ok = ok && !found.empty() && strict && counts.gamma_sharp > 0.0;
        measured += fmt("%sm=%ld: %zu witnesses, Gamma %.4g", measured.empty() ? "" : "; ", m, found.size(),
                        counts.gamma_sharp);
    }
    return {ok, measured, ">= 1 witness with |residual| < eps and Gamma > 0 for each m"};
}

inline CheckOutcome check_fourier_identity(const BatteryOptions& options) {
    const ProblemConfig config{reference::c, reference::theta, WindowIndex{2}};
    const DerivedScales s = derive_scales(config);
    SieveOptions sieve;
    sieve.exec = options.exec;
    const PrimeTable table = sieve_window(PhaseContext::from(config, s), sieve);
    const SmoothingKernel kernel = fourier_kernel(s);
    const GammaCounts counts = gamma_counts(table, kernel, s, s.N_induced, options.exec);
    QuadratureGrid grid;
    grid.full_line = true;
    grid.full_line_reference = counts.gamma0_direct;
    const Gamma0Integral g = gamma0_via_integral(table, kernel, s, s.N_induced, grid, options.exec);
    const double gap = std::abs(g.total - counts.gamma0_direct);
    const bool within = gap <= 0.01 * counts.gamma0_direct + g.gamma3_bound;
    const bool small_tail = g.gamma3_bound < 1.0;
    std::string full_line = "not run";
    if (g.full_line_performed) {
        full_line = fmt("|alpha| <= %.4g gives %.10g (rel diff %.2e, tail bound %.3g)", g.full_line_cutoff,
                        g.full_line_value, rel_err(g.full_line_value, counts.gamma0_direct), g.full_line_tail_bound);
    }
    return {within && small_tail,
            fmt("gamma0_direct %.10g, total %.10g (gamma1 %.6g, gamma2 %.6g), |diff| %.4g; gamma3_bound %.4g "
                "(k=%d); full line: %s",
                counts.gamma0_direct, g.total, g.gamma1, g.gamma2, gap, g.gamma3_bound, g.kernel_k,
                full_line.c_str()),
            "|diff| <= 0.01 gamma0_direct + gamma3_bound and gamma3_bound < 1"};
}

inline CheckOutcome check_major_arc_trend(const BatteryOptions& options) {
    std::vector<double> max_dev;
    std::vector<double> dev0;
    for (long m = 2; m <= 5; ++m) {
        const ProblemConfig config{reference::c, reference::theta, WindowIndex{m}};
        const DerivedScales s = derive_scales(config);
        const PhaseContext ctx = PhaseContext::from(config, s);
        SieveOptions sieve;
        sieve.exec = options.exec;
        const PrimeTable table = sieve_window(ctx, sieve);
        const auto samples = major_arc_deviation(table, s, ctx, 65, options.exec);
        double worst = 0.0;
        for (const auto& a : samples) worst = std::max(worst, a.deviation);
        max_dev.push_back(worst);
        dev0.push_back(samples[32].deviation);
    }
    bool ok = true;
    for (std::size_t i = 1; i < max_dev.size(); ++i) ok = ok && max_dev[i] <= 1.2 * max_dev[i - 1];
    for (std::size_t i = 1; i < dev0.size(); ++i) ok = ok && dev0[i] < 0.05;
    return {ok,
            fmt("max deviation m=2..5: %.3g, %.3g, %.3g, %.3g; at alpha=0: %.3g, %.3g, %.3g, %.3g", max_dev[0],
                max_dev[1], max_dev[2], max_dev[3], dev0[0], dev0[1], dev0[2], dev0[3]),
            "non-increasing within 20%; alpha=0 deviation < 0.05 for m >= 3"};
}

inline CheckOutcome check_mean_square(const BatteryOptions& options) {
    std::vector<double> major;
    std::vector<double> unit;
    std::string unit_text;
    MeanSquareOptions ms;
    ms.exec = options.exec;
    MeanSquareOptions unit_ms = ms;
    unit_ms.max_initial_intervals = std::size_t{1} << 11;
    unit_ms.max_intervals = std::size_t{1} << 12;
    unit_ms.rel_tol = 0.01;
    for (long m = 2; m <= 5; ++m) {
        const ProblemConfig config{reference::c, reference::theta, WindowIndex{m}};
        const DerivedScales s = derive_scales(config);
        SieveOptions sieve;
        sieve.exec = options.exec;
        const PrimeTable table = sieve_window(PhaseContext::from(config, s), sieve);
        major.push_back(mean_square_s_major(table, s, ms).value / major_mean_square_scale(s, config.c));
        unit_text += fmt("%sm=%ld:", m == 2 ? "" : "; ", m);
        for (long n : unit_interval_starts(s)) {
            unit.push_back(mean_square_s_unit(table, n, unit_ms).value / unit_mean_square_scale(s));
            unit_text += fmt(" %.3g", unit.back());
        }
    }
    auto spread = [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
    };
    auto peak = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
    const bool ok = peak(major) <= 100.0 && peak(unit) <= 100.0 && spread(major) <= 10.0 && spread(unit) <= 10.0;
    return {ok,
            fmt("major arc m=2..5: %.3g, %.3g, %.3g, %.3g (spread %.3g); unit intervals n=0,1,floor(1/eps) %s "
                "(spread %.3g)",
                major[0], major[1], major[2], major[3], spread(major), unit_text.c_str(), spread(unit)),
            "every ratio <= 100; max/min <= 10 within each family"};
}

inline CheckOutcome check_integer_sum(const BatteryOptions& options) {
    const ProblemConfig config{reference::c, reference::theta, WindowIndex{2}};
    const DerivedScales s = derive_scales(config);
    const auto profile = integer_sum_profile(s, PhaseContext::from(config, s), 64, options.exec);
    double worst = 0.0;
    for (const auto& p : profile) worst = std::max(worst, p.magnitude / p.bound);
    return {worst <= 10.0, fmt("max |A(t)| / bound over %zu points: %.4g", profile.size(), worst), "<= 10"};
}

// Every CLI artifact for the reference window, concatenated.
inline std::string artifact_bundle(const Exec& exec) {
    const ProblemConfig config{reference::c, reference::theta, WindowIndex{reference::m}};
    std::ostringstream primes, alpha, integer, psi, fourier, witnesses;
    SieveOptions sieve;
    sieve.exec = exec;
    ExpsumOptions expsum;
    expsum.exec = exec;
    SearchOptions search;
    search.exec = exec;
    json all = json::array();
    all.push_back(derive_document(config));
    all.push_back(sieve_document(config, sieve, &primes));
    all.push_back(expsum_document(config, expsum, alpha, &integer));
    all.push_back(kernel_document(reference::epsilon, 8, 1001, 1000, &psi, &fourier));
    all.push_back(search_document(config, search, &witnesses));
    return all.dump(2) + primes.str() + alpha.str() + integer.str() + psi.str() + fourier.str() + witnesses.str();
}

inline CheckOutcome check_determinism(const BatteryOptions&) {
    const std::string a = artifact_bundle(Exec{1});
    const std::string b = artifact_bundle(Exec{1});
    const std::string c = artifact_bundle(Exec{4});
    const bool ok = a == b && a == c;
    return {ok,
            fmt("%zu bytes; repeat run %s, 4 threads %s", a.size(), a == b ? "identical" : "DIFFERS",
                a == c ? "identical" : "DIFFERS"),
            "byte-identical across runs and thread counts 1, 4"};
}

struct CriterionSpec {
    const char* title;
    double time_limit;
    CheckOutcome (*check)(const BatteryOptions&);
};

inline const CriterionSpec& criterion_spec(int id) {
    static const CriterionSpec specs[criterion_count] = {
        {"scale system", 1.0, check_scales},
        {"phase correctness", 1.0, check_phase},
        {"kernel Fourier bound", 5.0, check_kernel},
        {"search oracle equivalence", 30.0, check_search_equivalence},
        {"witness existence", 60.0, check_witness_existence},
        {"smoothed count, direct vs frequency side", 120.0, check_fourier_identity},
        {"major-arc deviation trend", 60.0, check_major_arc_trend},
        {"mean-square ratios", 120.0, check_mean_square},
        {"integer sum bound shape", 30.0, check_integer_sum},
        {"determinism", 10.0, check_determinism},
    };
    if (id < 1 || id > criterion_count) fail(error_kind::validation, "no criterion " + std::to_string(id));
    return specs[id - 1];
}

}  // namespace detail

/// Runs one criterion.  Exceptions from the modules count as a failure and
/// are reported in `measured`.
inline CriterionResult run_criterion(int id, const BatteryOptions& options = {}) {
    const auto& spec = detail::criterion_spec(id);
    CriterionResult r;
    r.id = id;
    r.title = spec.title;
    r.time_limit = spec.time_limit;
    if (options.progress) *options.progress << "criterion " << id << ": " << spec.title << " ..." << std::endl;
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto outcome = spec.check(options);
        r.check_passed = outcome.ok;
        r.measured = outcome.measured;
        r.threshold = outcome.threshold;
    } catch (const std::exception& e) {
        r.check_passed = false;
        r.measured = std::string("error: ") + e.what();
        r.threshold = "no error";
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = r.check_passed && r.seconds < r.time_limit;
    return r;
}

/// One line: status, id, title, measured vs threshold, time vs limit.
inline std::string format_result(const CriterionResult& r) {
    return detail::fmt("%s %2d %s: %s [threshold: %s] (%.2f s, limit %.0f s)", r.passed ? "PASS" : "FAIL", r.id,
                       r.title.c_str(), r.measured.c_str(), r.threshold.c_str(), r.seconds, r.time_limit);
}

}  // namespace tanprime

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "support/test_support.hpp"

using namespace tanprime;
using namespace tanprime::testing;

namespace {

std::vector<std::uint64_t> trial_division(double lower, double upper) {
    std::vector<std::uint64_t> out;
    for (auto n = static_cast<std::uint64_t>(std::floor(lower)) + 1; n <= static_cast<std::uint64_t>(std::floor(upper));
         ++n) {
        if (is_prime_by_trial_division(n)) out.push_back(n);
    }
    return out;
}

PrimeTable reference_table() {
    const ProblemConfig config{1.05, 2.0, WindowIndex{2}};
    const DerivedScales s = derive_scales(config);
    return sieve_window(PhaseContext::from(config, s));
}

}  // namespace

TEST(SieveWindow, ReferenceWindow) {
    const PrimeTable t = reference_table();
    EXPECT_EQ(t.size(), reference::prime_count);
    EXPECT_EQ(t.primes.front(), reference::first_prime);
    EXPECT_EQ(t.primes.back(), reference::last_prime);
    EXPECT_LE(rel(t.theta_sum, reference::theta_sum), 1e-13);
    EXPECT_EQ(t.primes, trial_division(reference::delta1, reference::delta2));
}

TEST(SieveWindow, SmallHandWindows) {
    EXPECT_EQ(sieve_window(2.0, 10.0).primes, (std::vector<std::uint64_t>{3, 5, 7}));
    EXPECT_EQ(sieve_window(2.0, 3.0).primes, (std::vector<std::uint64_t>{3}));
    const PrimeTable empty = sieve_window(10.0, 10.5);
    EXPECT_TRUE(empty.empty());
    EXPECT_EQ(empty.theta_sum, 0.0);
    EXPECT_EQ(chebyshev_theta(empty), 0.0);
}

TEST(SieveWindow, RealBoundsAreComparedExactly) {
    EXPECT_EQ(sieve_window(10.999999, 13.0).primes, (std::vector<std::uint64_t>{11, 13}));
    EXPECT_EQ(sieve_window(11.0, 13.0).primes, (std::vector<std::uint64_t>{13}));
    EXPECT_TRUE(sieve_window(11.0000001, 12.9999999).empty());
    EXPECT_EQ(sieve_window(12.5, 13.0).primes, (std::vector<std::uint64_t>{13}));
}

TEST(SieveWindow, SinglePrimeTheta) {
    const PrimeTable t = sieve_window(12.0, 16.0);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.primes[0], 13u);
    EXPECT_EQ(chebyshev_theta(t), std::log(13.0));
}

TEST(SieveWindow, RejectsBadBounds) {
    EXPECT_THROW(sieve_window(1.5, 10.0), error);
    EXPECT_THROW(sieve_window(10.0, 10.0), error);
    EXPECT_THROW(sieve_window(20.0, 10.0), error);
}

TEST(SieveWindow, BudgetErrorReportsRequiredAndAvailable) {
    SieveOptions options;
    options.max_segments = 10;
    try {
        (void)sieve_window(2.0, 1e8, options);
        FAIL() << "expected a budget error";
    } catch (const budget_error& e) {
        EXPECT_EQ(e.kind(), error_kind::budget);
        EXPECT_EQ(e.available(), 10u);
        EXPECT_GT(e.required(), 10u);
        EXPECT_EQ(e.unit(), "segments");
    }
    EXPECT_THROW((void)sieve_window(2.0, 1e9), budget_error);
}

TEST(SieveWindowProperty, MatchesTrialDivisionUpToOneMillion) {
    auto rng = make_rng(301);
    for (int trial = 0; trial < 60; ++trial) {
        const double lower = uniform(rng, 2.0, 999'000.0);
        const double length = std::exp(uniform(rng, 0.0, std::log(300'000.0)));
        const double upper = std::min(1e6, lower + length);
        if (!(upper > lower)) continue;
        EXPECT_EQ(sieve_window(lower, upper).primes, trial_division(lower, upper))
            << "(" << lower << ", " << upper << "]";
    }
}

TEST(SieveWindowProperty, FullRangeToOneMillionMatchesPlainEratosthenes) {
    const int limit = 1'000'000;
    std::vector<bool> composite(limit + 1, false);
    std::vector<std::uint64_t> expect;
    for (int i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        expect.push_back(i);
        for (long j = static_cast<long>(i) * i; j <= limit; j += i) composite[j] = true;
    }
    expect.erase(expect.begin());  // 2 is not in (2, 1e6]
    const PrimeTable t = sieve_window(2.0, limit);
    EXPECT_EQ(t.primes, expect);
}

TEST(SieveWindowProperty, SegmentBoundariesAreSeamless) {
    // The first segment spans 2^16 odd numbers, so windows straddling 2^17 cross a boundary.
    const double edge = 2.0 * 65536.0;
    for (double offset : {-3.0, -1.0, 0.0, 1.0, 2.0}) {
        const double lower = 1000.0 + offset;
        EXPECT_EQ(sieve_window(lower, lower + edge + 10.0).primes, trial_division(lower, lower + edge + 10.0));
    }
}

TEST(SieveWindowProperty, PhasesAscendAndMatchPhaseValue) {
    auto rng = make_rng(302);
    for (int trial = 0; trial < 20; ++trial) {
        const ProblemConfig config = random_config(rng, 1, 4);
        const DerivedScales s = derive_scales(config);
        const PhaseContext ctx = PhaseContext::from(config, s);
        const PrimeTable t = sieve_window(ctx);
        ASSERT_TRUE(t.has_phases());
        for (std::size_t i = 0; i < t.size(); ++i) {
            EXPECT_EQ(t.phase_values[i], phase_value(ctx, static_cast<double>(t.primes[i])));
            EXPECT_LE(rel(t.phase_values[i], big_phase(config.c, config.theta, static_cast<double>(t.primes[i]))),
                      1e-12);
            if (i > 0) {
                EXPECT_LT(t.phase_values[i - 1], t.phase_values[i]);
            }
        }
    }
}

TEST(SieveWindowProperty, ThreadCountDoesNotChangeTheTable) {
    const ProblemConfig config{1.05, 2.0, WindowIndex{4}};
    const PhaseContext ctx = PhaseContext::from(config, derive_scales(config));
    SieveOptions one;
    SieveOptions four;
    four.exec.threads = 4;
    const PrimeTable a = sieve_window(ctx, one);
    const PrimeTable b = sieve_window(ctx, four);
    EXPECT_EQ(a.primes, b.primes);
    EXPECT_EQ(a.phase_values, b.phase_values);
    EXPECT_EQ(a.theta_sum, b.theta_sum);
}

TEST(ChebyshevTheta, ReferenceWindowNearWindowLength) {
    const PrimeTable t = reference_table();
    const double length = reference::delta2 - reference::delta1;
    EXPECT_NEAR(chebyshev_theta(t) / length, 1.0, 0.05);
    EXPECT_EQ(chebyshev_theta(t), t.theta_sum);
    double direct = 0.0;
    for (auto p : trial_division(reference::delta1, reference::delta2)) direct += std::log(static_cast<double>(p));
    EXPECT_NEAR(chebyshev_theta(t), direct, 1e-10);
}

TEST(WritePrimeCsv, HeaderAndRows) {
    const PrimeTable t = reference_table();
    std::ostringstream os;
    write_prime_csv(os, t);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "prime,log_weight,phase_value");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (rows == 0) {
            EXPECT_EQ(line.substr(0, 4), "821,");
        }
        ++rows;
    }
    EXPECT_EQ(rows, t.size());
}

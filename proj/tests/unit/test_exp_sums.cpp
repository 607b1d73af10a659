#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "support/test_support.hpp"

using namespace tanprime;
using namespace tanprime::testing;

namespace {

struct ReferenceWindow {
    ProblemConfig config{reference::c, reference::theta, WindowIndex{reference::m}};
    DerivedScales scales = derive_scales(config);
    PhaseContext ctx = PhaseContext::from(config, scales);
    PrimeTable table = sieve_window(ctx);
};

const ReferenceWindow& window() {
    static const ReferenceWindow w;
    return w;
}

// f(y) straight from tan(log y), no reduction of the logarithm.
double plain_phase(double y) {
    return std::pow(y, reference::c) * std::pow(std::tan(std::log(y)), reference::theta);
}

// Integral of e(alpha f) over [delta1, delta2] by adaptive Gauss-Kronrod on
// 400 equal pieces.
complex integral_oracle(double alpha) {
    using boost::math::quadrature::gauss_kronrod;
    const double a = reference::delta1;
    const double b = reference::delta2;
    const int pieces = 400;
    double re = 0.0;
    double im = 0.0;
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + (b - a) * i / pieces;
        const double hi = a + (b - a) * (i + 1) / pieces;
        re += gauss_kronrod<double, 61>::integrate(
            [&](double y) { return std::cos(2 * std::numbers::pi * alpha * plain_phase(y)); }, lo, hi, 10, 1e-14);
        im += gauss_kronrod<double, 61>::integrate(
            [&](double y) { return std::sin(2 * std::numbers::pi * alpha * plain_phase(y)); }, lo, hi, 10, 1e-14);
    }
    return {re, im};
}

// Integral of |S|^2 over [a, b] in closed form:
// sum_{p,q} w_p w_q int_a^b e(alpha (f_p - f_q)) d alpha.
double mean_square_oracle(const PrimeTable& t, double a, double b) {
    double total = 0.0;
    for (std::size_t p = 0; p < t.size(); ++p) {
        for (std::size_t q = 0; q < t.size(); ++q) {
            const double w = t.log_weights[p] * t.log_weights[q];
            const double d = t.phase_values[p] - t.phase_values[q];
            if (d == 0.0) {
                total += w * (b - a);
            } else {
                // Real part of (e(b d) - e(a d)) / (2 pi i d).
                total += w * (std::sin(2 * std::numbers::pi * b * d) - std::sin(2 * std::numbers::pi * a * d)) /
                         (2 * std::numbers::pi * d);
            }
        }
    }
    return total;
}

}  // namespace

TEST(PrimeExpSum, AtZeroIsThetaSum) {
    const auto& w = window();
    const complex s0 = prime_exp_sum(w.table, 0.0);
    EXPECT_EQ(s0.imag(), 0.0);
    EXPECT_LE(rel(s0.real(), reference::theta_sum), 1e-14);
}

TEST(PrimeExpSum, ConjugateSymmetryIsExact) {
    const auto& w = window();
    auto rng = make_rng(501);
    for (int i = 0; i < 200; ++i) {
        const double alpha = uniform(rng, -3.0, 3.0);
        const complex a = prime_exp_sum(w.table, alpha);
        const complex b = prime_exp_sum(w.table, -alpha);
        EXPECT_EQ(a.real(), b.real());
        EXPECT_EQ(a.imag(), -b.imag());
    }
}

TEST(PrimeExpSum, AtTauMatchesOracle) {
    const complex s = prime_exp_sum(window().table, reference::tau);
    EXPECT_NEAR(s.real(), reference::s_at_tau_re, 1e-9);
    EXPECT_NEAR(s.imag(), reference::s_at_tau_im, 1e-9);
}

TEST(PrimeExpSum, BoundedByValueAtZero) {
    const auto& w = window();
    auto rng = make_rng(502);
    for (int i = 0; i < 500; ++i) {
        EXPECT_LE(std::abs(prime_exp_sum(w.table, uniform(rng, -10.0, 10.0))), w.table.theta_sum * (1 + 1e-14));
    }
}

TEST(PrimeExpSum, RejectsTableWithoutPhases) {
    const PrimeTable bare = sieve_window(100.0, 200.0);
    EXPECT_THROW(prime_exp_sum(bare, 0.1), error);
}

TEST(PrimeExpSumGrid, AgreesWithDirectSum) {
    const auto& w = window();
    const double step = 1.7e-4;
    const double alpha0 = -0.31;
    const auto grid = prime_exp_sum_grid(w.table, alpha0, step, 1000);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const complex direct = prime_exp_sum(w.table, alpha0 + static_cast<double>(i) * step);
        EXPECT_LE(std::abs(grid[i] - direct), 1e-12 * w.table.theta_sum) << "i = " << i;
    }
}

TEST(PrimeExpSumGrid, IndependentOfThreadCount) {
    const auto& w = window();
    const auto one = prime_exp_sum_grid(w.table, 0.0, 3e-3, 2000, Exec{1});
    const auto four = prime_exp_sum_grid(w.table, 0.0, 3e-3, 2000, Exec{4});
    ASSERT_EQ(one.size(), four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].real(), four[i].real());
        EXPECT_EQ(one[i].imag(), four[i].imag());
    }
}

TEST(IntegralExpSum, AtZeroIsWindowLength) {
    const auto& w = window();
    const complex i0 = integral_exp_sum(w.scales, w.ctx, 0.0);
    EXPECT_EQ(i0.real(), w.scales.delta2 - w.scales.delta1);
    EXPECT_EQ(i0.imag(), 0.0);
}

TEST(IntegralExpSum, MatchesGaussKronrod) {
    const auto& w = window();
    const double length = w.scales.delta2 - w.scales.delta1;
    for (double alpha : {reference::tau, 0.37 * reference::tau, -reference::tau, 0.02}) {
        const complex got = integral_exp_sum(w.scales, w.ctx, alpha);
        const complex want = integral_oracle(alpha);
        EXPECT_LE(std::abs(got - want), 1e-7 * length) << "alpha = " << alpha;
    }
}

TEST(IntegralExpSum, ConjugateSymmetry) {
    const auto& w = window();
    for (double alpha : {1e-4, 3e-3, 0.05}) {
        const complex a = integral_exp_sum(w.scales, w.ctx, alpha);
        const complex b = integral_exp_sum(w.scales, w.ctx, -alpha);
        EXPECT_EQ(a.real(), b.real());
        EXPECT_EQ(a.imag(), -b.imag());
    }
}

TEST(IntegralExpSumProperty, FirstDerivativeBound) {
    // f' is increasing and at least f'(delta1) on the window, so
    // |I(alpha)| <= 2 / (pi |alpha| f'(delta1)).
    const auto& w = window();
    const double slope = detail::phase_derivative_raw(w.ctx, w.scales.delta1);
    auto rng = make_rng(503);
    for (int i = 0; i < 25; ++i) {
        const double alpha = log_uniform(rng, 0.1 * reference::tau, 0.5) * (i % 2 ? -1.0 : 1.0);
        const double bound = 2.0 / (std::numbers::pi * std::abs(alpha) * slope);
        EXPECT_LE(std::abs(integral_exp_sum(w.scales, w.ctx, alpha)), bound * (1 + 1e-9)) << "alpha = " << alpha;
    }
}

TEST(IntegralExpSumProperty, FirstDerivativeShapeConstantStable) {
    // C_m = max over alpha in [tau, 100 tau] of |I(alpha)| |alpha| X^{c-1};
    // the fitted constant stays within a decade across windows.
    std::vector<double> fitted;
    for (long m = 2; m <= 4; ++m) {
        const ProblemConfig config{reference::c, reference::theta, WindowIndex{m}};
        const DerivedScales s = derive_scales(config);
        const PhaseContext ctx = PhaseContext::from(config, s);
        double worst = 0.0;
        for (double alpha : log_grid(s.tau, 100.0 * s.tau, 40)) {
            worst = std::max(worst, std::abs(integral_exp_sum(s, ctx, alpha)) * alpha * std::pow(s.X, reference::c - 1));
        }
        fitted.push_back(worst);
    }
    const double spread = *std::max_element(fitted.begin(), fitted.end()) / *std::min_element(fitted.begin(), fitted.end());
    EXPECT_LE(spread, 10.0) << fitted[0] << " " << fitted[1] << " " << fitted[2];
}

TEST(IntegralExpSum, StableUnderPanelDoubling) {
    const auto& w = window();
    IntegralOptions loose;
    loose.abs_tol_fraction = 1e-5;
    IntegralOptions tight;
    tight.abs_tol_fraction = 1e-11;
    const double length = w.scales.delta2 - w.scales.delta1;
    for (double alpha : {reference::tau, 0.1}) {
        EXPECT_LE(std::abs(integral_exp_sum(w.scales, w.ctx, alpha, loose) -
                           integral_exp_sum(w.scales, w.ctx, alpha, tight)),
                  2e-5 * length);
    }
}

TEST(IntegralExpSum, BudgetExceeded) {
    const auto& w = window();
    IntegralOptions tiny;
    tiny.max_nodes = 100;
    try {
        integral_exp_sum(w.scales, w.ctx, 0.5, tiny);
        FAIL() << "expected a budget error";
    } catch (const budget_error& e) {
        EXPECT_EQ(e.kind(), error_kind::budget);
        EXPECT_EQ(e.available(), 100u);
        EXPECT_GT(e.required(), 100u);
        EXPECT_EQ(e.unit(), "nodes");
    }
}

TEST(IntegerExpSum, AtZeroCountsIntegers) {
    const auto& w = window();
    const complex a0 = integer_exp_sum(w.scales, w.ctx, 0.0);
    EXPECT_EQ(a0.real(), std::floor(reference::delta2) - std::floor(reference::delta1));
    EXPECT_EQ(a0.real(), 807.0);
    EXPECT_EQ(a0.imag(), 0.0);
}

TEST(IntegerExpSum, MatchesPlainLoop) {
    const auto& w = window();
    for (double t : {1e-4, 0.0123, 0.5, 1.3}) {
        complex want{0.0, 0.0};
        for (int n = 814; n <= 1620; ++n) want += std::polar(1.0, 2 * std::numbers::pi * t * plain_phase(n));
        EXPECT_LE(std::abs(integer_exp_sum(w.scales, w.ctx, t) - want), 1e-8) << "t = " << t;
    }
}

TEST(IntegerExpSum, ConjugateSymmetry) {
    const auto& w = window();
    for (double t : {1e-3, 0.21}) {
        const complex a = integer_exp_sum(w.scales, w.ctx, t);
        const complex b = integer_exp_sum(w.scales, w.ctx, -t);
        EXPECT_EQ(a.real(), b.real());
        EXPECT_EQ(a.imag(), -b.imag());
    }
}

TEST(IntegerExpSum, BudgetExceeded) {
    const auto& w = window();
    EXPECT_THROW(integer_exp_sum(w.scales, w.ctx, 0.1, 10), budget_error);
}

TEST(IntegerSumBound, BranchesAndCap) {
    const auto& s = window().scales;
    const double t = 0.3;
    const double vdc = std::sqrt(t) * std::pow(s.X, reference::c / 2) + std::pow(s.X, 1 - reference::c) / t;
    EXPECT_LE(rel(integer_sum_bound(s, reference::c, t), vdc), 1e-15);
    EXPECT_EQ(integer_sum_bound(s, reference::c, 1e-12), s.X);
    EXPECT_EQ(integer_sum_bound(s, reference::c, -t), integer_sum_bound(s, reference::c, t));
}

TEST(IntegerSumProfile, RatioBoundedAndGridShape) {
    const auto& w = window();
    const auto profile = integer_sum_profile(w.scales, w.ctx, 64);
    ASSERT_EQ(profile.size(), 64u);
    EXPECT_LE(rel(profile.front().t, std::pow(w.scales.X, -reference::c)), 1e-14);
    EXPECT_LE(rel(profile.back().t, w.scales.H), 1e-14);
    for (std::size_t i = 1; i < profile.size(); ++i) EXPECT_GT(profile[i].t, profile[i - 1].t);
    for (const auto& p : profile) {
        EXPECT_GT(p.bound, 0.0);
        EXPECT_LE(p.magnitude / p.bound, 10.0) << "t = " << p.t;
    }
    std::ostringstream csv;
    write_integer_sum_csv(csv, profile);
    const std::string text = csv.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 65);
    EXPECT_EQ(text.substr(0, 14), "t,abs_A,bound\n");
}

TEST(MajorArcDeviation, SymmetricGridAndZeroSample) {
    const auto& w = window();
    const auto samples = major_arc_deviation(w.table, w.scales, w.ctx, 65);
    ASSERT_EQ(samples.size(), 65u);
    EXPECT_EQ(samples.front().alpha, -w.scales.tau);
    EXPECT_EQ(samples.back().alpha, w.scales.tau);
    EXPECT_EQ(samples[32].alpha, 0.0);
    for (std::size_t j = 0; j < samples.size(); ++j) {
        EXPECT_EQ(samples[j].alpha, -samples[64 - j].alpha);
        EXPECT_EQ(samples[j].deviation, samples[64 - j].deviation);
    }
    const double length = w.scales.delta2 - w.scales.delta1;
    EXPECT_LE(rel(samples[32].deviation, std::abs(w.table.theta_sum - length) / w.scales.X), 1e-12);
    EXPECT_THROW(major_arc_deviation(w.table, w.scales, w.ctx, 2), error);

    std::ostringstream csv;
    write_alpha_csv(csv, samples);
    const std::string text = csv.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 66);
    EXPECT_EQ(text.substr(0, 36), "alpha,re_S,im_S,re_I,im_I,deviation\n");
}

TEST(MajorArcDeviation, IndependentOfThreadCount) {
    const auto& w = window();
    const auto one = major_arc_deviation(w.table, w.scales, w.ctx, 33, Exec{1});
    const auto four = major_arc_deviation(w.table, w.scales, w.ctx, 33, Exec{4});
    for (std::size_t j = 0; j < one.size(); ++j) {
        EXPECT_EQ(one[j].deviation, four[j].deviation);
        EXPECT_EQ(one[j].s_value, four[j].s_value);
        EXPECT_EQ(one[j].i_value, four[j].i_value);
    }
}

TEST(MeanSquare, MajorArcMatchesClosedForm) {
    const auto& w = window();
    const auto r = mean_square_s_major(w.table, w.scales);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(rel(r.value, mean_square_oracle(w.table, -reference::tau, reference::tau)), 0.01);
}

TEST(MeanSquare, UnitIntervalsMatchClosedForm) {
    const auto& w = window();
    for (long n : {0L, 1L, 7L}) {
        const auto r = mean_square_s_unit(w.table, n);
        EXPECT_TRUE(r.converged) << "n = " << n;
        EXPECT_LE(rel(r.value, mean_square_oracle(w.table, n, n + 1.0)), 0.01) << "n = " << n;
    }
}

TEST(MeanSquare, UnitIntervalNearDiagonal) {
    // Off the origin the cross terms mostly cancel: the integral over a unit
    // interval is close to sum log^2 p.
    const auto& w = window();
    double diagonal = 0.0;
    for (double lw : w.table.log_weights) diagonal += lw * lw;
    const auto r = mean_square_s_unit(w.table, 1);
    EXPECT_GT(r.value, 0.5 * diagonal);
    EXPECT_LT(r.value, 2.0 * diagonal);
}

TEST(MeanSquare, IntegralOnMajorArcBoundedAndConverged) {
    const auto& w = window();
    const auto r = mean_square_i_major(w.scales, w.ctx);
    const double length = w.scales.delta2 - w.scales.delta1;
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.value, 0.0);
    EXPECT_LE(r.value, 2 * reference::tau * length * length);
    const auto via_dispatch = mean_square(MeanSquareKind::i_major, w.table, w.scales, w.ctx);
    EXPECT_EQ(r.value, via_dispatch.value);
}

TEST(MeanSquare, DispatchAndThreadIndependence) {
    const auto& w = window();
    MeanSquareOptions one;
    one.exec = Exec{1};
    MeanSquareOptions four;
    four.exec = Exec{4};
    EXPECT_EQ(mean_square_s_major(w.table, w.scales, one).value, mean_square_s_major(w.table, w.scales, four).value);
    EXPECT_EQ(mean_square(MeanSquareKind::s_unit, w.table, w.scales, w.ctx, 1, one).value,
              mean_square_s_unit(w.table, 1, four).value);
    EXPECT_EQ(mean_square(MeanSquareKind::s_major, w.table, w.scales, w.ctx).value,
              mean_square_s_major(w.table, w.scales).value);
}

TEST(MeanSquare, EmptyTable) {
    const PrimeTable empty = sieve_window(reference::delta1 + 1e-6, reference::delta1 + 2e-6);
    ASSERT_TRUE(empty.empty());
    const auto r = mean_square_s_unit(empty, 0);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_TRUE(r.converged);
    EXPECT_THROW(mean_square_s_unit(sieve_window(100.0, 200.0), 0), error);
}

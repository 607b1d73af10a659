#pragma once

#include <cfloat>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tanprime/error.hpp"
#include "tanprime/numeric.hpp"

namespace tanprime {

/// Right-hand side N of the inequality.
struct TargetN {
    double value;
};

/// Window index m = [log X / pi].
struct WindowIndex {
    long value;
};

struct ProblemConfig {
    double c;
    double theta;
    std::variant<TargetN, WindowIndex> target;
};

inline constexpr double c_upper = 10.0 / 9.0;

inline void validate(const ProblemConfig& config) {
    if (!(config.c > 1.0 && config.c < c_upper)) {
        fail(error_kind::validation,
             "c = " + std::to_string(config.c) + " must lie strictly inside (1, 10/9)");
    }
    if (!(config.theta > 1.0) || !std::isfinite(config.theta)) {
        fail(error_kind::validation, "theta = " + std::to_string(config.theta) + " must exceed 1");
    }
    if (const auto* n = std::get_if<TargetN>(&config.target)) {
        if (!(n->value > 0.0) || !std::isfinite(n->value)) {
            fail(error_kind::validation, "N must be a positive finite number");
        }
    } else if (std::get<WindowIndex>(config.target).value < 0) {
        fail(error_kind::validation, "window index m must be non-negative");
    }
}

/// Every scale of the construction, derived from (c, theta) and the window.
struct DerivedScales {
    long m = 0;
    double log_X = 0.0;
    double X = 0.0;
    double epsilon = 0.0;
    double tau = 0.0;
    double H = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double N_induced = 0.0;
    std::optional<double> N_requested;
    std::optional<double> N_mismatch_rel;
};

namespace detail {

inline const double atan_3_2 = std::atan(1.5);
inline const double atan_4_9 = std::atan(4.0 / 9.0);
inline const double atan_2 = std::atan(2.0);

// log(3^{theta+1} 2^{-theta})
inline double log_n_prefactor(double theta) {
    return compensated_sum({(theta + 1.0) * std::log(3.0), -theta * std::log(2.0)});
}

inline double log_dbl_max() { return std::log(DBL_MAX); }

}  // namespace detail

inline DerivedScales scales_for_window(double c, double theta, long m) {
    DerivedScales s;
    s.m = m;
    s.log_X = add_pi_multiple(detail::atan_3_2, m);
    // X^{3c} must stay representable: the ternary sums reach 3 N ~ X^c and
    // cubes of S reach X^3.
    if (3.0 * c * s.log_X + detail::log_n_prefactor(theta) >= detail::log_dbl_max()) {
        fail(error_kind::validation,
             "window index m = " + std::to_string(m) + " overflows binary64 (X^{3c} too large)");
    }
    s.X = std::exp(s.log_X);
    s.epsilon = std::exp(s.log_X * (c - c_upper) / c);
    s.tau = std::exp(s.log_X * (1.0 / 9.0 - c));
    s.H = std::exp(s.log_X * (c_upper - c));
    s.delta1 = std::exp(add_pi_multiple(detail::atan_4_9, m));
    s.delta2 = std::exp(add_pi_multiple(detail::atan_2, m));
    s.N_induced = std::exp(compensated_sum({detail::log_n_prefactor(theta), c * s.log_X}));
    return s;
}

/// Resolves the target to a window index and derives X, epsilon, tau, H and the
/// window (delta1, delta2].  An N target is snapped to the nearest admissible
/// window; the induced N and the relative mismatch are reported.
inline DerivedScales derive_scales(const ProblemConfig& config) {
    validate(config);
    if (const auto* w = std::get_if<WindowIndex>(&config.target)) {
        return scales_for_window(config.c, config.theta, w->value);
    }
    const double n = std::get<TargetN>(config.target).value;
    const double r = compensated_sum({std::log(n), -detail::log_n_prefactor(config.theta)}) / config.c;
    const double m_real = std::nearbyint((r - detail::atan_3_2) / pi_hi);
    if (m_real < 0.0) {
        fail(error_kind::validation, "N = " + std::to_string(n) +
                                         " is below the smallest admissible window (m would be negative)");
    }
    if (m_real > 1e6) fail(error_kind::validation, "N too large: window index overflows");
    DerivedScales s = scales_for_window(config.c, config.theta, static_cast<long>(m_real));
    s.N_requested = n;
    s.N_mismatch_rel = std::abs(n - s.N_induced) / n;
    return s;
}

/// Structural checks on a scale set; empty when everything holds.
inline std::vector<std::string> scale_violations(const DerivedScales& s, double c, double rel_tol = 1e-12) {
    std::vector<std::string> out;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    if (!(s.epsilon > 0.0)) out.emplace_back("epsilon must be positive");
    if (!(s.tau > 0.0)) out.emplace_back("tau must be positive");
    if (!(s.H > s.tau)) out.emplace_back("H must exceed tau");
    if (!(s.delta1 < s.X && s.X < s.delta2)) out.emplace_back("delta1 < X < delta2 violated");
    if (!(s.delta2 < 2.0 * s.delta1)) out.emplace_back("delta2 < 2 delta1 violated");
    if (!(s.X / 16.0 < s.delta1 && s.delta1 < 2.0 * s.X)) out.emplace_back("2^-4 X < delta1 < 2X violated");
    if (!(s.X / 8.0 < s.delta2 && s.delta2 < 4.0 * s.X)) out.emplace_back("2^-3 X < delta2 < 4X violated");
    if (s.X > 0.0 && s.epsilon > 0.0 && rel(s.epsilon, std::pow(s.X, (c - c_upper) / c)) > rel_tol)
        out.emplace_back("epsilon != X^{(c-10/9)/c}");
    if (s.X > 0.0 && s.tau > 0.0 && rel(s.tau, std::pow(s.X, 1.0 / 9.0 - c)) > rel_tol)
        out.emplace_back("tau != X^{1/9-c}");
    if (s.X > 0.0 && s.H > 0.0 && rel(s.H, std::pow(s.X, c_upper - c)) > rel_tol)
        out.emplace_back("H != X^{10/9-c}");
    return out;
}

/// Throws a validation error if the scale set is not usable downstream.
inline void validate(const DerivedScales& s, double c) {
    const auto v = scale_violations(s, c);
    if (!v.empty()) fail(error_kind::validation, "derived scales inconsistent: " + v.front());
}

/// Interior points of the window used for the lower bound on the singular
/// integral: lambda_lo < lambda < mu < lambda_hi inside (3/2, 2).
struct WindowGeometry {
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    double lambda = 0.0;
    double mu = 0.0;
    double delta_lambda = 0.0;
    double delta_mu = 0.0;
};

inline WindowGeometry window_geometry(const ProblemConfig& config, const DerivedScales& scales) {
    validate(config);
    const double theta = config.theta;
    const double base = std::exp(detail::log_n_prefactor(theta));  // 3^{theta+1} / 2^theta
    WindowGeometry g;
    g.lambda_lo = std::pow(0.4 * (base - 0.75), 1.0 / theta);
    g.lambda_hi = std::pow(0.4 * (base - 2.0 / 3.0), 1.0 / theta);
    const double width = g.lambda_hi - g.lambda_lo;
    g.lambda = g.lambda_lo + width / 3.0;
    g.mu = g.lambda_lo + 2.0 * width / 3.0;
    g.delta_lambda = std::exp(add_pi_multiple(std::atan(g.lambda), scales.m));
    g.delta_mu = std::exp(add_pi_multiple(std::atan(g.mu), scales.m));

    const bool chain = 4.0 / 9.0 < 1.5 && 1.5 < g.lambda_lo && g.lambda_lo < g.lambda && g.lambda < g.mu &&
                       g.mu < g.lambda_hi && g.lambda_hi < 2.0;
    if (!chain) {
        fail(error_kind::geometry, "chain 4/9 < 3/2 < lambda_lo < lambda < mu < lambda_hi < 2 fails at theta = " +
                                       std::to_string(theta) + " in binary64");
    }
    if (!(scales.delta1 < g.delta_lambda && g.delta_lambda < g.delta_mu && g.delta_mu < scales.delta2)) {
        fail(error_kind::geometry, "delta1 < delta_lambda < delta_mu < delta2 fails");
    }
    return g;
}

}  // namespace tanprime

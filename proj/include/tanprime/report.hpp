#pragma once

#include <cstdio>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "tanprime/exp_sums.hpp"
#include "tanprime/scales.hpp"
#include "tanprime/witness_search.hpp"

namespace tanprime {

using json = nlohmann::ordered_json;

namespace detail {

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace detail

inline json to_json(const ProblemConfig& config) {
    json j;
    j["c"] = config.c;
    j["theta"] = config.theta;
    if (const auto* n = std::get_if<TargetN>(&config.target)) {
        j["N"] = n->value;
        j["m"] = nullptr;
    } else {
        j["N"] = nullptr;
        j["m"] = std::get<WindowIndex>(config.target).value;
    }
    return j;
}

inline json to_json(const DerivedScales& s) {
    json j;
    j["m"] = s.m;
    j["X"] = s.X;
    j["epsilon"] = s.epsilon;
    j["tau"] = s.tau;
    j["H"] = s.H;
    j["delta1"] = s.delta1;
    j["delta2"] = s.delta2;
    j["N_induced"] = s.N_induced;
    j["N_requested"] = detail::optional_number(s.N_requested);
    j["N_mismatch_rel"] = detail::optional_number(s.N_mismatch_rel);
    return j;
}

inline json to_json(const WindowGeometry& g) {
    json j;
    j["lambda_lo"] = g.lambda_lo;
    j["lambda_hi"] = g.lambda_hi;
    j["lambda"] = g.lambda;
    j["mu"] = g.mu;
    j["delta_lambda"] = g.delta_lambda;
    j["delta_mu"] = g.delta_mu;
    return j;
}

inline json to_json(const MeanSquareResult& r) {
    json j;
    j["value"] = r.value;
    j["intervals"] = r.intervals;
    j["refinements"] = r.refinements;
    j["converged"] = r.converged;
    return j;
}

inline json to_json(const Gamma0Integral& g) {
    json j;
    j["gamma1"] = g.gamma1;
    j["gamma2"] = g.gamma2;
    j["gamma3_bound"] = g.gamma3_bound;
    j["total"] = g.total;
    j["kernel_k"] = g.kernel_k;
    j["node_spacing"] = g.node_spacing;
    j["nodes"] = g.nodes;
    j["refinements"] = g.refinements;
    j["converged"] = g.converged;
    if (g.full_line_performed) {
        j["full_line"] = {{"cutoff", g.full_line_cutoff},
                          {"value", g.full_line_value},
                          {"tail_bound", g.full_line_tail_bound}};
    } else {
        j["full_line"] = nullptr;
    }
    return j;
}

inline json to_json(const SearchReport& r) {
    json j;
    j["config"] = to_json(r.config);
    j["scales"] = to_json(r.scales);
    j["N"] = r.target;
    j["epsilon"] = r.epsilon;
    j["kernel_k"] = r.kernel_k;
    j["prime_count"] = r.prime_count;
    j["witness_count"] = r.witness_count;
    j["ordered_witness_count"] = r.ordered_witness_count;
    j["gamma_sharp"] = r.gamma_sharp;
    j["gamma0_direct"] = r.gamma0_direct;
    if (r.integral) {
        j["gamma0_integral"] = r.integral->total;
        j["gamma1"] = r.integral->gamma1;
        j["gamma2"] = r.integral->gamma2;
        j["gamma3"] = r.integral->gamma3_bound;
        j["integral"] = to_json(*r.integral);
    } else {
        j["gamma0_integral"] = nullptr;
        j["gamma1"] = nullptr;
        j["gamma2"] = nullptr;
        j["gamma3"] = nullptr;
        j["integral"] = nullptr;
    }
    j["theta_prediction"] = r.theta_prediction;
    return j;
}

inline json to_json(const WitnessTriple& w) {
    return json{{"p1", w.p1}, {"p2", w.p2}, {"p3", w.p3}, {"value", w.value}, {"residual", w.residual},
                {"weight", w.weight}};
}

/// One JSON object per line.
inline void write_witness_jsonl(std::ostream& os, std::span<const WitnessTriple> witnesses) {
    for (const auto& w : witnesses) os << to_json(w).dump() << '\n';
}

inline void write_scaling_csv(std::ostream& os, std::span<const ScalingRow> rows) {
    os << "m,X,epsilon,prime_count,witness_count,gamma_sharp,theta_prediction,ratio\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%zu,%zu,%.17g,%.17g,%.17g\n", r.m, r.X, r.epsilon,
                      r.prime_count, r.witness_count, r.gamma_sharp, r.theta_prediction, r.ratio);
        os << buf;
    }
}

}  // namespace tanprime

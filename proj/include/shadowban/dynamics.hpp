#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shadowban/common.hpp"
#include "shadowban/network.hpp"

namespace shadowban {

struct DynamicsParams {
    double omega = 0.003;   // per-post opinion-shift gain
    double epsilon = 0.1;   // confidence half-width
    double dt_max = 1.0;    // largest Euler step, days

    void validate() const {
        if (!(omega >= 0.0)) throw std::invalid_argument("omega must be >= 0");
        if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
        if (!(dt_max > 0.0)) throw std::invalid_argument("dt_max must be > 0");
    }
};

/// Per-post opinion shift: omega*x within the confidence interval
/// (|x| <= epsilon, inclusive), zero outside. Odd in x.
inline double shift_function(double x, const DynamicsParams& params) {
    return std::abs(x) <= params.epsilon ? params.omega * x : 0.0;
}

namespace detail {

inline void check_ban(std::span<const double> ban, std::size_t edge_count) {
    if (!ban.empty() && ban.size() != edge_count)
        throw std::invalid_argument("ban vector has " + std::to_string(ban.size()) +
                                    " entries for " + std::to_string(edge_count) + " edges");
}

} // namespace detail

/// d(theta_i)/dt = sum over in-edges e=(j->i) of rate_e*(1-u_e)*f(theta_j-theta_i).
/// An empty ban span means no banning. Accumulation is per-vertex in edge-id
/// order, so the result is independent of any internal parallelism.
inline void opinion_derivative(const DirectedNetwork& network, const OpinionVector& opinions,
                               std::span<const double> ban, const DynamicsParams& params,
                               std::vector<double>& out) {
    detail::check_ban(ban, network.edge_count());
    const std::uint32_t n = network.vertex_count();
    if (opinions.size() != n)
        throw std::invalid_argument("opinion vector size mismatch");
    out.assign(n, 0.0);
    const double* theta = opinions.data();
    for (std::uint32_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::uint32_t e : network.in_edges(i)) {
            const Edge& ed = network.edge(e);
            double w = ed.rate * shift_function(theta[ed.source] - theta[i], params);
            if (!ban.empty()) w *= 1.0 - ban[e];
            acc += w;
        }
        out[i] = acc;
    }
}

inline std::vector<double> opinion_derivative(const DirectedNetwork& network,
                                              const OpinionVector& opinions,
                                              std::span<const double> ban,
                                              const DynamicsParams& params) {
    std::vector<double> out;
    opinion_derivative(network, opinions, ban, params, out);
    return out;
}

/// Largest stable Euler step for this network: dt*omega*max_in_rate <= 0.5.
inline double stability_dt_limit(const DirectedNetwork& network, const DynamicsParams& params) {
    const double d = params.omega * network.max_in_rate();
    return d > 0.0 ? 0.5 / d : std::numeric_limits<double>::infinity();
}

/// One forward Euler step with opinions frozen at the step start.
/// Refuses dt beyond dt_max or the stability bound; callers sub-step instead.
inline void step_euler(const DirectedNetwork& network, OpinionVector& opinions,
                       std::span<const double> ban, const DynamicsParams& params, double dt,
                       std::vector<double>& deriv_buffer) {
    if (!(dt >= 0.0)) throw std::invalid_argument("dt must be >= 0");
    if (dt > params.dt_max * (1.0 + 1e-12))
        throw std::invalid_argument("dt " + format_double(dt) + " exceeds dt_max " +
                                    format_double(params.dt_max));
    const double limit = stability_dt_limit(network, params);
    if (dt > limit * (1.0 + 1e-12))
        throw std::invalid_argument("dt " + format_double(dt) + " violates the stability bound dt*omega*max_in_rate <= 0.5 (limit " +
                                    format_double(limit) + "); integrate with sub-steps");
    opinion_derivative(network, opinions, ban, params, deriv_buffer);
    for (std::size_t i = 0; i < opinions.size(); ++i)
        opinions[i] += dt * deriv_buffer[i];
}

inline OpinionVector step_euler(const DirectedNetwork& network, const OpinionVector& opinions,
                                std::span<const double> ban, const DynamicsParams& params,
                                double dt) {
    OpinionVector next = opinions;
    std::vector<double> deriv;
    step_euler(network, next, ban, params, dt, deriv);
    return next;
}

/// Event-driven oracle: each vertex posts at Poisson times at its total
/// out-rate; a post reaches follower i over edge e with probability
/// (rate_e / out_rate)*(1 - u_e), shifting theta_i by f. Deterministic per seed.
inline OpinionVector simulate_discrete_events(const DirectedNetwork& network,
                                              const OpinionVector& opinions,
                                              std::span<const double> ban,
                                              const DynamicsParams& params, double horizon,
                                              std::uint64_t seed) {
    detail::check_ban(ban, network.edge_count());
    if (opinions.size() != network.vertex_count())
        throw std::invalid_argument("opinion vector size mismatch");
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
    params.validate();

    OpinionVector theta = opinions;
    std::mt19937_64 gen(seed);

    std::vector<double> out_rate(network.vertex_count(), 0.0);
    for (std::uint32_t v = 0; v < network.vertex_count(); ++v)
        for (std::uint32_t e : network.out_edges(v)) out_rate[v] += network.edge(e).rate;

    using Event = std::pair<double, std::uint32_t>;  // (time, vertex), earliest first
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;
    for (std::uint32_t v = 0; v < network.vertex_count(); ++v)
        if (out_rate[v] > 0.0) queue.emplace(exponential(gen, out_rate[v]), v);

    while (!queue.empty() && queue.top().first <= horizon) {
        auto [t, v] = queue.top();
        queue.pop();
        for (std::uint32_t e : network.out_edges(v)) {
            const Edge& ed = network.edge(e);
            double accept = ed.rate / out_rate[v];
            if (!ban.empty()) accept *= 1.0 - ban[e];
            if (uniform01(gen) < accept)
                theta[ed.target] += shift_function(theta[v] - theta[ed.target], params);
        }
        queue.emplace(t + exponential(gen, out_rate[v]), v);
    }
    return theta;
}

} // namespace shadowban

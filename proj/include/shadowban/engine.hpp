#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shadowban/common.hpp"
#include "shadowban/dynamics.hpp"
#include "shadowban/generate.hpp"
#include "shadowban/metrics.hpp"
#include "shadowban/network.hpp"
#include "shadowban/objectives.hpp"
#include "shadowban/policy.hpp"

namespace shadowban {

/// Unrecoverable mid-run failure (non-finite state); maps to exit code 2.
class abort_error : public std::runtime_error {
public:
    explicit abort_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SimulationConfig {
    double horizon_days = 365.0;
    double policy_interval_days = 1.0;
    double record_interval_days = 1.0;
    ObjectiveKind objective = ObjectiveKind::MaximizeMean;
    BanBudget budget;
    DynamicsParams dynamics;
    std::int64_t seed = 0;
    bool baseline = false;  // force the zero policy

    /// Number of policy intervals; throws unless the intervals divide evenly.
    std::size_t interval_count() const {
        const double n = horizon_days / policy_interval_days;
        const double rounded = std::round(n);
        if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * std::max(1.0, n))
            throw std::invalid_argument("horizon_days must be a positive multiple of policy_interval_days");
        return static_cast<std::size_t>(rounded);
    }

    /// Policy intervals per record interval.
    std::size_t record_stride() const {
        const double m = record_interval_days / policy_interval_days;
        const double rounded = std::round(m);
        if (rounded < 1.0 || std::abs(m - rounded) > 1e-9 * std::max(1.0, m))
            throw std::invalid_argument("record_interval_days must be a positive multiple of policy_interval_days");
        return static_cast<std::size_t>(rounded);
    }

    void validate() const {
        if (!(horizon_days > 0.0)) throw std::invalid_argument("horizon_days must be > 0");
        if (!(policy_interval_days > 0.0)) throw std::invalid_argument("policy_interval_days must be > 0");
        if (!(record_interval_days > 0.0)) throw std::invalid_argument("record_interval_days must be > 0");
        budget.validate();
        dynamics.validate();
        interval_count();
        record_stride();
    }
};

struct RunResult {
    std::vector<TrajectoryFrame> frames;
    OpinionVector final_opinions;
};

/// Called at each policy instant with the freshly solved policy and the
/// opinions it was solved against; drives snapshot export and run logs.
using PolicyObserver = std::function<void(double day, const ShadowBanPolicy&, const OpinionVector&)>;

/// Integrate `days` under a fixed ban vector, sub-stepping into the smallest
/// number of equal Euler steps satisfying dt <= dt_max and the stability bound.
inline void integrate_interval(const DirectedNetwork& network, OpinionVector& opinions,
                               std::span<const double> ban, const DynamicsParams& params,
                               double days, std::vector<double>& deriv_buffer) {
    const double limit = std::min(params.dt_max, stability_dt_limit(network, params));
    std::size_t steps = static_cast<std::size_t>(std::ceil(days / limit - 1e-12));
    if (steps < 1) steps = 1;
    const double dt = days / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s)
        step_euler(network, opinions, ban, params, dt, deriv_buffer);
}

/// The simulation loop: per policy interval, solve the ban LP on the current
/// opinions (or take the zero policy when baseline), record a frame on record
/// instants, then integrate the interval under the held policy. A terminal
/// frame at the horizon closes the trajectory.
inline RunResult run(const SimulationConfig& config, const DirectedNetwork& network,
                     const OpinionVector& initial_opinions, const PolicyObserver& observer = {}) {
    config.validate();
    validate_opinions(network, initial_opinions);

    const std::size_t intervals = config.interval_count();
    const std::size_t stride = config.record_stride();

    RunResult result;
    result.frames.reserve(intervals / stride + 2);
    OpinionVector theta = initial_opinions;
    EdgeCoefficients coeffs;
    std::vector<double> gradient_buffer, deriv_buffer;
    ShadowBanPolicy policy = ShadowBanPolicy::zero(network.edge_count(), config.budget, 0.0);

    for (std::size_t k = 0; k < intervals; ++k) {
        const double day = static_cast<double>(k) * config.policy_interval_days;
        if (config.baseline) {
            policy.day = day;
        } else {
            compute_coefficients(network, theta, config.objective, config.dynamics, coeffs,
                                 gradient_buffer);
            policy = solve_policy(coeffs, config.budget, day);
        }
        if (observer) observer(day, policy, theta);
        if (k % stride == 0) result.frames.push_back(summarize(network, theta, policy, day));
        integrate_interval(network, theta, policy.u, config.dynamics,
                           config.policy_interval_days, deriv_buffer);
        for (std::size_t i = 0; i < theta.size(); ++i)
            if (!std::isfinite(theta[i]))
                throw abort_error("non-finite opinion on vertex " + std::to_string(i) +
                                  " after interval " + std::to_string(k) + " (day " +
                                  format_double(day + config.policy_interval_days) + ")");
    }
    result.frames.push_back(summarize(network, theta, policy, config.horizon_days));
    result.final_opinions = std::move(theta);
    return result;
}

/// Relative terminal objective of a controlled run against its zero-policy
/// baseline. The compared scalar is the terminal mean for the mean objective
/// and the terminal variance for the variance objectives. When the baseline
/// scalar is zero the difference is reported instead, flagged by is_ratio.
struct RelativeObjective {
    double value = 1.0;
    bool is_ratio = true;
};

namespace detail {

inline double terminal_scalar(ObjectiveKind kind, const TrajectoryFrame& frame) {
    return kind == ObjectiveKind::MaximizeMean ? frame.mean : frame.variance;
}

inline RelativeObjective relative_from_scalars(ObjectiveKind kind, double controlled,
                                               double baseline) {
    const double sign = kind == ObjectiveKind::MinimizeVariance ? -1.0 : 1.0;
    if (baseline == 0.0) return {sign * (controlled - baseline), false};
    return {1.0 + sign * (controlled - baseline) / std::abs(baseline), true};
}

} // namespace detail

inline RelativeObjective run_relative(const SimulationConfig& config,
                                      const DirectedNetwork& network,
                                      const OpinionVector& initial_opinions) {
    SimulationConfig baseline_config = config;
    baseline_config.baseline = true;
    const RunResult baseline = run(baseline_config, network, initial_opinions);
    const RunResult controlled = run(config, network, initial_opinions);
    return detail::relative_from_scalars(config.objective,
                                         detail::terminal_scalar(config.objective, controlled.frames.back()),
                                         detail::terminal_scalar(config.objective, baseline.frames.back()));
}

/// Cartesian sweep axes; an empty list pins that axis to the base config.
struct SweepGrid {
    std::vector<double> s_network;
    std::vector<double> s_edge;
    std::vector<double> epsilon;
    std::vector<double> omega;
};

struct SweepRow {
    double s_network = 0.0;
    double s_edge = 0.0;
    double epsilon = 0.0;
    double omega = 0.0;
    std::optional<double> relative;
    bool is_ratio = true;
    std::string status;  // "ok", "abs-diff", or an error message
};

/// Evaluate run_relative over the grid, rows in deterministic nested order
/// (s_network, then s_edge, then epsilon, then omega). Baselines are shared
/// across budgets per (epsilon, omega). Point failures land in the status
/// column and the sweep continues.
inline std::vector<SweepRow> sweep(const SimulationConfig& base, const SweepGrid& grid,
                                   const DirectedNetwork& network,
                                   const OpinionVector& initial_opinions,
                                   std::size_t workers = 1) {
    base.validate();
    auto axis = [](const std::vector<double>& values, double fallback) {
        return values.empty() ? std::vector<double>{fallback} : values;
    };
    const std::vector<double> s_networks = axis(grid.s_network, base.budget.s_network);
    const std::vector<double> s_edges = axis(grid.s_edge, base.budget.s_edge);
    const std::vector<double> epsilons = axis(grid.epsilon, base.dynamics.epsilon);
    const std::vector<double> omegas = axis(grid.omega, base.dynamics.omega);
    for (double v : s_networks)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("sweep s_network value outside [0, 1]");
    for (double v : s_edges)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("sweep s_edge value outside [0, 1]");
    for (double v : epsilons)
        if (!(v >= 0.0)) throw std::invalid_argument("sweep epsilon value must be >= 0");
    for (double v : omegas)
        if (!(v >= 0.0)) throw std::invalid_argument("sweep omega value must be >= 0");

    std::vector<SweepRow> rows;
    for (double sn : s_networks)
        for (double se : s_edges)
            for (double eps : epsilons)
                for (double om : omegas) rows.push_back({sn, se, eps, om, std::nullopt, true, ""});

    // one baseline per dynamics setting, computed up front
    std::map<std::pair<double, double>, std::pair<double, std::string>> baselines;
    for (const SweepRow& row : rows) baselines.emplace(std::make_pair(row.epsilon, row.omega),
                                                       std::make_pair(0.0, std::string()));
    for (auto& [key, value] : baselines) {
        SimulationConfig cfg = base;
        cfg.baseline = true;
        cfg.dynamics.epsilon = key.first;
        cfg.dynamics.omega = key.second;
        try {
            const RunResult r = run(cfg, network, initial_opinions);
            value.first = detail::terminal_scalar(base.objective, r.frames.back());
        } catch (const std::exception& ex) {
            value.second = ex.what();
        }
    }

    auto evaluate = [&](SweepRow& row) {
        const auto& [baseline_scalar, baseline_error] = baselines.at({row.epsilon, row.omega});
        try {
            if (!baseline_error.empty()) throw abort_error("baseline failed: " + baseline_error);
            SimulationConfig cfg = base;
            cfg.baseline = false;
            cfg.budget.s_network = row.s_network;
            cfg.budget.s_edge = row.s_edge;
            cfg.dynamics.epsilon = row.epsilon;
            cfg.dynamics.omega = row.omega;
            const RunResult controlled = run(cfg, network, initial_opinions);
            const RelativeObjective rel = detail::relative_from_scalars(
                base.objective, detail::terminal_scalar(base.objective, controlled.frames.back()),
                baseline_scalar);
            row.relative = rel.value;
            row.is_ratio = rel.is_ratio;
            row.status = rel.is_ratio ? "ok" : "abs-diff";
        } catch (const std::exception& ex) {
            std::string msg = ex.what();
            for (char& c : msg)
                if (c == ',' || c == '\n') c = ';';
            row.status = "error: " + msg;
        }
    };

    if (workers <= 1) {
        for (SweepRow& row : rows) evaluate(row);
        return rows;
    }
    std::vector<std::future<void>> tasks;
    for (std::size_t w = 0; w < workers; ++w)
        tasks.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < rows.size(); i += workers) evaluate(rows[i]);
        }));
    for (auto& t : tasks) t.get();
    return rows;
}

/// Desk-scale stand-in for a real follower network: a two-cluster SBM with
/// 30,000 vertices and about 1e6 directed edges, opinions drawn from a
/// bimodal normal mixture clamped to [0, 1].
inline std::pair<DirectedNetwork, OpinionVector> standin_network(std::uint64_t seed) {
    const std::uint32_t half = 15000;
    const double p_intra = 0.002111;
    const double p_inter = 0.000111;
    auto [network, opinions] = generate_sbm({half, half}, {{p_intra, p_inter}, {p_inter, p_intra}},
                                            {0.35, 0.65}, seed);
    std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ull);
    for (std::uint32_t v = 0; v < network.vertex_count(); ++v) {
        const double mean = v < half ? 0.35 : 0.65;
        opinions[v] = std::clamp(mean + 0.08 * standard_normal(gen), 0.0, 1.0);
    }
    return {std::move(network), std::move(opinions)};
}

} // namespace shadowban

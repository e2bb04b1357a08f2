#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "shadowban/network.hpp"
#include "shadowban/objectives.hpp"
#include "shadowban/policy.hpp"

namespace shadowban {

/// Opinion split at a threshold; ties (== threshold) go to the low group.
struct PartisanSplit {
    double threshold = 0.5;
};

struct TrajectoryFrame {
    double day = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    std::array<double, 5> quantiles{};  // p = 0.05, 0.25, 0.50, 0.75, 0.95
    double mean_ban_strength = 0.0;
    std::optional<double> ban_rate_low;   // absent when the group is empty
    std::optional<double> ban_rate_high;
};

struct BanRates {
    std::optional<double> low;
    std::optional<double> high;
};

struct EdgePolarityStats {
    std::size_t upward_count = 0;    // banned edges with theta_source > theta_target
    std::size_t downward_count = 0;  // banned edges with theta_source < theta_target
    std::size_t neutral_count = 0;
    double upward_mass = 0.0;        // total u over each class
    double downward_mass = 0.0;
    double neutral_mass = 0.0;
};

struct Histogram {
    std::vector<double> edges;    // bin_count + 1 boundaries over [0, 1]
    std::vector<double> density;  // integrates to 1 for nonempty input
};

/// Linear interpolation between order statistics at p*(n-1) over sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Fraction of each opinion group whose vertex has any out-edge with u > 0.
/// Rates are absent (not zero) for empty groups.
inline BanRates shadow_ban_rate(const DirectedNetwork& network, const ShadowBanPolicy& policy,
                                const OpinionVector& opinions, PartisanSplit split = {}) {
    if (opinions.size() != network.vertex_count())
        throw std::invalid_argument("opinion vector size mismatch");
    if (policy.u.size() != network.edge_count())
        throw std::invalid_argument("policy size mismatch");
    std::size_t low_total = 0, high_total = 0, low_banned = 0, high_banned = 0;
    for (std::uint32_t v = 0; v < network.vertex_count(); ++v) {
        bool banned = false;
        for (std::uint32_t e : network.out_edges(v))
            if (policy.u[e] > 0.0) { banned = true; break; }
        if (opinions[v] <= split.threshold) {
            ++low_total;
            low_banned += banned;
        } else {
            ++high_total;
            high_banned += banned;
        }
    }
    BanRates rates;
    if (low_total > 0) rates.low = static_cast<double>(low_banned) / static_cast<double>(low_total);
    if (high_total > 0) rates.high = static_cast<double>(high_banned) / static_cast<double>(high_total);
    return rates;
}

/// Banned edges (u > 0) split by the pull they exert on the target:
/// upward when the source sits above the target, downward below, neutral equal.
inline EdgePolarityStats edge_polarity_ban_stats(const DirectedNetwork& network,
                                                 const ShadowBanPolicy& policy,
                                                 const OpinionVector& opinions) {
    if (opinions.size() != network.vertex_count())
        throw std::invalid_argument("opinion vector size mismatch");
    if (policy.u.size() != network.edge_count())
        throw std::invalid_argument("policy size mismatch");
    EdgePolarityStats stats;
    for (std::size_t e = 0; e < network.edge_count(); ++e) {
        const double u = policy.u[e];
        if (!(u > 0.0)) continue;
        const Edge& ed = network.edge(e);
        const double d = opinions[ed.source] - opinions[ed.target];
        if (d > 0.0) {
            ++stats.upward_count;
            stats.upward_mass += u;
        } else if (d < 0.0) {
            ++stats.downward_count;
            stats.downward_mass += u;
        } else {
            ++stats.neutral_count;
            stats.neutral_mass += u;
        }
    }
    return stats;
}

/// Equal-width histogram over [0, 1]; density integrates to 1.
/// Values at 1.0 land in the last bin.
inline Histogram histogram(const OpinionVector& opinions, std::size_t bin_count) {
    if (bin_count < 1) throw std::invalid_argument("bin_count must be >= 1");
    if (opinions.empty()) throw std::invalid_argument("histogram of empty sample");
    Histogram h;
    h.edges.resize(bin_count + 1);
    for (std::size_t b = 0; b <= bin_count; ++b)
        h.edges[b] = static_cast<double>(b) / static_cast<double>(bin_count);
    std::vector<std::size_t> counts(bin_count, 0);
    for (double v : opinions) {
        double clamped = std::clamp(v, 0.0, 1.0);
        std::size_t b = std::min(static_cast<std::size_t>(clamped * static_cast<double>(bin_count)),
                                 bin_count - 1);
        ++counts[b];
    }
    const double width = 1.0 / static_cast<double>(bin_count);
    h.density.resize(bin_count);
    for (std::size_t b = 0; b < bin_count; ++b)
        h.density[b] = static_cast<double>(counts[b]) /
                       (static_cast<double>(opinions.size()) * width);
    return h;
}

/// One trajectory row: distribution statistics plus ban accounting.
inline TrajectoryFrame summarize(const DirectedNetwork& network, const OpinionVector& opinions,
                                 const ShadowBanPolicy& policy, double day,
                                 PartisanSplit split = {}) {
    if (opinions.empty()) throw std::invalid_argument("summarize of empty opinion vector");
    TrajectoryFrame frame;
    frame.day = day;
    frame.mean = detail::opinion_mean(opinions);
    frame.variance = opinions.size() >= 2 ? detail::sample_variance(opinions) : 0.0;
    std::vector<double> sorted(opinions);
    std::sort(sorted.begin(), sorted.end());
    const std::array<double, 5> probs{0.05, 0.25, 0.50, 0.75, 0.95};
    for (std::size_t q = 0; q < probs.size(); ++q)
        frame.quantiles[q] = quantile_sorted(sorted, probs[q]);
    frame.mean_ban_strength = policy.mean_strength();
    const BanRates rates = shadow_ban_rate(network, policy, opinions, split);
    frame.ban_rate_low = rates.low;
    frame.ban_rate_high = rates.high;
    return frame;
}

} // namespace shadowban

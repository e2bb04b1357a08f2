#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "shadowban/common.hpp"
#include "shadowban/io.hpp"
#include "shadowban/metrics.hpp"
#include "shadowban/network.hpp"
#include "shadowban/policy.hpp"

namespace shadowban {

inline std::string policy_snapshot_name(double day) {
    return "policy_day_" + format_double(day) + ".csv";
}

inline void write_trajectory_csv(const std::string& path,
                                 const std::vector<TrajectoryFrame>& frames) {
    auto out = detail::open_output(path);
    out << "day,mean,variance,q05,q25,q50,q75,q95,mean_ban_strength,ban_rate_low,ban_rate_high\n";
    for (const TrajectoryFrame& f : frames) {
        out << format_double(f.day) << "," << format_double(f.mean) << ","
            << format_double(f.variance);
        for (double q : f.quantiles) out << "," << format_double(q);
        out << "," << format_double(f.mean_ban_strength);
        out << "," << (f.ban_rate_low ? format_double(*f.ban_rate_low) : std::string());
        out << "," << (f.ban_rate_high ? format_double(*f.ban_rate_high) : std::string());
        out << "\n";
    }
    detail::finish_output(out, path);
}

inline void write_histogram_csv(const std::string& path, const Histogram& hist) {
    auto out = detail::open_output(path);
    out << "bin_left,bin_right,density\n";
    for (std::size_t b = 0; b < hist.density.size(); ++b)
        out << format_double(hist.edges[b]) << "," << format_double(hist.edges[b + 1]) << ","
            << format_double(hist.density[b]) << "\n";
    detail::finish_output(out, path);
}

inline void write_opinions_csv(const std::string& path, const OpinionVector& opinions,
                               const std::vector<std::string>& external_ids = {}) {
    auto out = detail::open_output(path);
    out << "node,opinion\n";
    for (std::size_t v = 0; v < opinions.size(); ++v)
        out << (external_ids.empty() ? std::to_string(v) : external_ids[v]) << ","
            << format_double(opinions[v]) << "\n";
    detail::finish_output(out, path);
}

/// Rows only for edges with u > 0, in edge order, ids matching the node file.
inline void write_policy_snapshot(const std::string& path, const DirectedNetwork& network,
                                  const ShadowBanPolicy& policy,
                                  const std::vector<std::string>& external_ids = {}) {
    if (policy.u.size() != network.edge_count())
        throw std::invalid_argument("policy size mismatch");
    auto id = [&](std::uint32_t v) {
        return external_ids.empty() ? std::to_string(v) : external_ids[v];
    };
    auto out = detail::open_output(path);
    out << "source,target,u\n";
    for (std::size_t e = 0; e < network.edge_count(); ++e) {
        if (!(policy.u[e] > 0.0)) continue;
        const Edge& ed = network.edge(e);
        out << id(ed.source) << "," << id(ed.target) << "," << format_double(policy.u[e]) << "\n";
    }
    detail::finish_output(out, path);
}

/// Lookup table from (source, target) internal ids to edge position.
inline std::unordered_map<std::uint64_t, std::uint32_t> edge_lookup(const DirectedNetwork& network) {
    std::unordered_map<std::uint64_t, std::uint32_t> lookup;
    lookup.reserve(network.edge_count() * 2);
    for (std::uint32_t e = 0; e < network.edge_count(); ++e) {
        const Edge& ed = network.edge(e);
        lookup.emplace((static_cast<std::uint64_t>(ed.source) << 32) | ed.target, e);
    }
    return lookup;
}

inline ShadowBanPolicy read_policy_snapshot(
    const std::string& path, const DirectedNetwork& network,
    const std::unordered_map<std::string, std::uint32_t>& id_of,
    const std::unordered_map<std::uint64_t, std::uint32_t>& lookup, BanBudget budget, double day) {
    ShadowBanPolicy policy = ShadowBanPolicy::zero(network.edge_count(), budget, day);
    auto in = detail::open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (lineno == 1 && sv == "source,target,u") continue;
        auto fields = split_csv(sv);
        if (fields.size() != 3)
            throw parse_error(path, lineno,
                              "expected 3 fields `source,target,u`, got " + std::to_string(fields.size()));
        const std::string src(trim(fields[0])), tgt(trim(fields[1]));
        double u;
        if (!parse_double(trim(fields[2]), u))
            throw parse_error(path, lineno, "malformed ban strength `" + std::string(trim(fields[2])) + "`");
        auto si = id_of.find(src);
        auto ti = id_of.find(tgt);
        if (si == id_of.end() || ti == id_of.end())
            throw validation_error(path + ":" + std::to_string(lineno) + ": unknown node id " +
                                   (si == id_of.end() ? src : tgt));
        auto edge = lookup.find((static_cast<std::uint64_t>(si->second) << 32) | ti->second);
        if (edge == lookup.end())
            throw validation_error(path + ":" + std::to_string(lineno) + ": no edge " + src + " -> " + tgt);
        if (!(u >= 0.0 && u <= 1.0))
            throw validation_error(path + ":" + std::to_string(lineno) + ": ban strength " +
                                   format_double(u) + " outside [0, 1]");
        policy.u[edge->second] = u;
    }
    return policy;
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    auto out = detail::open_output(path);
    out << "s_network,s_edge,epsilon,omega,relative_objective,status\n";
    for (const SweepRow& row : rows) {
        out << format_double(row.s_network) << "," << format_double(row.s_edge) << ","
            << format_double(row.epsilon) << "," << format_double(row.omega) << ","
            << (row.relative ? format_double(*row.relative) : std::string()) << "," << row.status
            << "\n";
    }
    detail::finish_output(out, path);
}

struct BiasReportRow {
    double day = 0.0;
    BanRates rates;
    EdgePolarityStats polarity;
};

inline void write_bias_report(const std::string& path, const std::vector<BiasReportRow>& rows) {
    auto out = detail::open_output(path);
    out << "day,ban_rate_low,ban_rate_high,upward_count,downward_count,neutral_count,"
           "upward_mass,downward_mass,neutral_mass\n";
    for (const BiasReportRow& row : rows) {
        out << format_double(row.day) << ","
            << (row.rates.low ? format_double(*row.rates.low) : std::string()) << ","
            << (row.rates.high ? format_double(*row.rates.high) : std::string()) << ","
            << row.polarity.upward_count << "," << row.polarity.downward_count << ","
            << row.polarity.neutral_count << "," << format_double(row.polarity.upward_mass) << ","
            << format_double(row.polarity.downward_mass) << ","
            << format_double(row.polarity.neutral_mass) << "\n";
    }
    detail::finish_output(out, path);
}

} // namespace shadowban

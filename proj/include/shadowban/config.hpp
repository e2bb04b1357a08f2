#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadowban/common.hpp"
#include "shadowban/engine.hpp"

namespace shadowban {

/// A resolved invocation: the simulation config plus file wiring.
/// Serialized as one JSON document; flags use kebab-case of the same names.
struct RunSpec {
    SimulationConfig sim;
    std::string edges;
    std::string nodes;
    std::string out = "run";
    bool save_policies = false;
    std::size_t bins = 50;
    SweepGrid grid;          // sweep only
    std::size_t workers = 1; // sweep only
};

namespace detail {

using ordered_json = nlohmann::ordered_json;

template <typename T>
T get_field(const ordered_json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& ex) {
        throw parse_error(path + ": key `" + key + "`: " + ex.what());
    }
}

inline void check_known_keys(const ordered_json& j, const std::string& path,
                             const std::string& prefix, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) { ok = true; break; }
        if (!ok) throw parse_error(path + ": unknown key `" + prefix + key + "`");
    }
}

} // namespace detail

inline RunSpec config_from_json(const detail::ordered_json& j, const std::string& path) {
    using detail::get_field;
    detail::check_known_keys(j, path, "",
                             {"horizon_days", "policy_interval_days", "record_interval_days",
                              "objective", "budget", "dynamics", "seed", "baseline", "edges",
                              "nodes", "out", "save_policies", "bins", "grid", "workers"});
    RunSpec spec;
    spec.sim.horizon_days = get_field(j, path, "horizon_days", spec.sim.horizon_days);
    spec.sim.policy_interval_days = get_field(j, path, "policy_interval_days", spec.sim.policy_interval_days);
    spec.sim.record_interval_days = get_field(j, path, "record_interval_days", spec.sim.record_interval_days);
    if (j.contains("objective")) {
        try {
            spec.sim.objective = parse_objective(j.at("objective").get<std::string>());
        } catch (const nlohmann::json::exception& ex) {
            throw parse_error(path + ": key `objective`: " + ex.what());
        }
    }
    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        detail::check_known_keys(b, path, "budget.", {"s_network", "s_edge"});
        spec.sim.budget.s_network = get_field(b, path, "s_network", spec.sim.budget.s_network);
        spec.sim.budget.s_edge = get_field(b, path, "s_edge", spec.sim.budget.s_edge);
    }
    if (j.contains("dynamics")) {
        const auto& d = j.at("dynamics");
        detail::check_known_keys(d, path, "dynamics.", {"omega", "epsilon", "dt_max"});
        spec.sim.dynamics.omega = get_field(d, path, "omega", spec.sim.dynamics.omega);
        spec.sim.dynamics.epsilon = get_field(d, path, "epsilon", spec.sim.dynamics.epsilon);
        spec.sim.dynamics.dt_max = get_field(d, path, "dt_max", spec.sim.dynamics.dt_max);
    }
    spec.sim.seed = get_field(j, path, "seed", spec.sim.seed);
    spec.sim.baseline = get_field(j, path, "baseline", spec.sim.baseline);
    spec.edges = get_field(j, path, "edges", spec.edges);
    spec.nodes = get_field(j, path, "nodes", spec.nodes);
    spec.out = get_field(j, path, "out", spec.out);
    spec.save_policies = get_field(j, path, "save_policies", spec.save_policies);
    spec.bins = get_field(j, path, "bins", spec.bins);
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        detail::check_known_keys(g, path, "grid.", {"s_network", "s_edge", "epsilon", "omega"});
        spec.grid.s_network = get_field(g, path, "s_network", spec.grid.s_network);
        spec.grid.s_edge = get_field(g, path, "s_edge", spec.grid.s_edge);
        spec.grid.epsilon = get_field(g, path, "epsilon", spec.grid.epsilon);
        spec.grid.omega = get_field(g, path, "omega", spec.grid.omega);
    }
    spec.workers = get_field(j, path, "workers", spec.workers);
    return spec;
}

inline detail::ordered_json config_to_json(const RunSpec& spec, bool include_grid) {
    detail::ordered_json j;
    j["horizon_days"] = spec.sim.horizon_days;
    j["policy_interval_days"] = spec.sim.policy_interval_days;
    j["record_interval_days"] = spec.sim.record_interval_days;
    j["objective"] = objective_token(spec.sim.objective);
    j["budget"] = {{"s_network", spec.sim.budget.s_network}, {"s_edge", spec.sim.budget.s_edge}};
    j["dynamics"] = {{"omega", spec.sim.dynamics.omega},
                     {"epsilon", spec.sim.dynamics.epsilon},
                     {"dt_max", spec.sim.dynamics.dt_max}};
    j["seed"] = spec.sim.seed;
    j["baseline"] = spec.sim.baseline;
    j["edges"] = spec.edges;
    j["nodes"] = spec.nodes;
    j["out"] = spec.out;
    j["save_policies"] = spec.save_policies;
    j["bins"] = spec.bins;
    if (include_grid) {
        j["grid"] = {{"s_network", spec.grid.s_network},
                     {"s_edge", spec.grid.s_edge},
                     {"epsilon", spec.grid.epsilon},
                     {"omega", spec.grid.omega}};
        j["workers"] = spec.workers;
    }
    return j;
}

inline RunSpec read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path + " for reading");
    detail::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw parse_error(path + ": " + ex.what());
    }
    if (!j.is_object()) throw parse_error(path + ": config must be a JSON object");
    return config_from_json(j, path);
}

inline void write_config(const std::string& path, const RunSpec& spec, bool include_grid = false) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << config_to_json(spec, include_grid).dump(2) << "\n";
    out.flush();
    if (!out) throw io_error("write failed on " + path);
}

} // namespace shadowban

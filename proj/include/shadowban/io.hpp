#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "shadowban/common.hpp"
#include "shadowban/network.hpp"

namespace shadowban {

/// Result of load_network: dense internal ids plus the original file ids.
struct NetworkBundle {
    DirectedNetwork network;
    OpinionVector opinions;
    std::vector<std::string> external_ids;  // external_ids[internal] = id string from the node file
    bool dense_ids = true;                  // true when external ids were already 0..|V|-1 in order
};

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path + " for reading");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw io_error("write failed on " + path);
}

} // namespace detail

/// Read node and edge CSVs (formats: `node,opinion` and `source,target,rate`,
/// header rows skipped). External ids may be arbitrary strings; internal ids
/// are dense in file order. Non-dense ids get a sidecar `<nodes_path>.idmap.csv`.
inline NetworkBundle load_network(const std::string& edges_path, const std::string& nodes_path) {
    NetworkBundle bundle;
    std::unordered_map<std::string, std::uint32_t> id_of;

    {
        auto in = detail::open_input(nodes_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string_view sv = trim(line);
            if (sv.empty()) continue;
            if (lineno == 1 && sv == "node,opinion") continue;
            auto fields = split_csv(sv);
            if (fields.size() != 2)
                throw parse_error(nodes_path, lineno,
                                  "expected 2 fields `node,opinion`, got " + std::to_string(fields.size()));
            std::string id(trim(fields[0]));
            double opinion;
            if (id.empty() || !parse_double(trim(fields[1]), opinion))
                throw parse_error(nodes_path, lineno, "malformed node row `" + std::string(sv) + "`");
            if (!(opinion >= 0.0 && opinion <= 1.0))
                throw validation_error(nodes_path + ":" + std::to_string(lineno) + ": opinion " +
                                       format_double(opinion) + " of node " + id + " outside [0, 1]");
            auto [it, inserted] = id_of.emplace(id, static_cast<std::uint32_t>(bundle.external_ids.size()));
            if (!inserted)
                throw validation_error(nodes_path + ":" + std::to_string(lineno) + ": duplicate node id " + id);
            bundle.external_ids.push_back(std::move(id));
            bundle.opinions.push_back(opinion);
        }
    }

    std::vector<Edge> edges;
    {
        auto in = detail::open_input(edges_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string_view sv = trim(line);
            if (sv.empty()) continue;
            if (lineno == 1 && sv == "source,target,rate") continue;
            auto fields = split_csv(sv);
            if (fields.size() != 3)
                throw parse_error(edges_path, lineno,
                                  "expected 3 fields `source,target,rate`, got " + std::to_string(fields.size()));
            const std::string src(trim(fields[0])), tgt(trim(fields[1]));
            double rate;
            if (!parse_double(trim(fields[2]), rate))
                throw parse_error(edges_path, lineno, "malformed rate `" + std::string(trim(fields[2])) + "`");
            auto si = id_of.find(src);
            if (si == id_of.end())
                throw validation_error(edges_path + ":" + std::to_string(lineno) +
                                       ": edge references unknown node id " + src);
            auto ti = id_of.find(tgt);
            if (ti == id_of.end())
                throw validation_error(edges_path + ":" + std::to_string(lineno) +
                                       ": edge references unknown node id " + tgt);
            edges.push_back({si->second, ti->second, rate});
        }
    }

    bundle.network = DirectedNetwork(static_cast<std::uint32_t>(bundle.external_ids.size()), std::move(edges));

    bundle.dense_ids = true;
    for (std::size_t i = 0; i < bundle.external_ids.size(); ++i)
        if (bundle.external_ids[i] != std::to_string(i)) {
            bundle.dense_ids = false;
            break;
        }
    if (!bundle.dense_ids) {
        auto out = detail::open_output(nodes_path + ".idmap.csv");
        out << "external_id,internal_id\n";
        for (std::size_t i = 0; i < bundle.external_ids.size(); ++i)
            out << bundle.external_ids[i] << "," << i << "\n";
        detail::finish_output(out, nodes_path + ".idmap.csv");
    }
    return bundle;
}

/// Write edge and node CSVs at full round-trip precision. When external_ids
/// is empty, internal ids 0..|V|-1 are written.
inline void save_network(const DirectedNetwork& network, const OpinionVector& opinions,
                         const std::string& edges_path, const std::string& nodes_path,
                         const std::vector<std::string>& external_ids = {}) {
    validate_opinions(network, opinions);
    if (!external_ids.empty() && external_ids.size() != network.vertex_count())
        throw std::invalid_argument("save_network: id map size mismatch");
    auto id = [&](std::uint32_t v) {
        return external_ids.empty() ? std::to_string(v) : external_ids[v];
    };
    {
        auto out = detail::open_output(nodes_path);
        out << "node,opinion\n";
        for (std::uint32_t v = 0; v < network.vertex_count(); ++v)
            out << id(v) << "," << format_double(opinions[v]) << "\n";
        detail::finish_output(out, nodes_path);
    }
    {
        auto out = detail::open_output(edges_path);
        out << "source,target,rate\n";
        for (const Edge& e : network.edges())
            out << id(e.source) << "," << id(e.target) << "," << format_double(e.rate) << "\n";
        detail::finish_output(out, edges_path);
    }
}

} // namespace shadowban

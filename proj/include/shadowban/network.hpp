#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shadowban/common.hpp"

namespace shadowban {

/// One directed edge: the source's posts reach the target, so the source's
/// opinion pulls on the target at the given Poisson rate (posts per day).
struct Edge {
    std::uint32_t source = 0;
    std::uint32_t target = 0;
    double rate = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

using OpinionVector = std::vector<double>;

/// Directed network with CSR-style in/out adjacency over edge ids.
/// Immutable after construction; construction validates structure.
class DirectedNetwork {
public:
    DirectedNetwork() = default;

    DirectedNetwork(std::uint32_t vertex_count, std::vector<Edge> edges)
        : vertex_count_(vertex_count), edges_(std::move(edges)) {
        validate();
        build_indexes();
    }

    std::uint32_t vertex_count() const { return vertex_count_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(std::size_t e) const { return edges_[e]; }

    /// Edge ids whose target is v, ascending.
    std::span<const std::uint32_t> in_edges(std::uint32_t v) const {
        return {in_ids_.data() + in_offsets_[v], in_ids_.data() + in_offsets_[v + 1]};
    }

    /// Edge ids whose source is v, ascending.
    std::span<const std::uint32_t> out_edges(std::uint32_t v) const {
        return {out_ids_.data() + out_offsets_[v], out_ids_.data() + out_offsets_[v + 1]};
    }

    /// Largest total incoming rate over vertices; 0 for an edgeless network.
    double max_in_rate() const { return max_in_rate_; }

    friend bool operator==(const DirectedNetwork& a, const DirectedNetwork& b) {
        return a.vertex_count_ == b.vertex_count_ && a.edges_ == b.edges_;
    }

private:
    void validate() const {
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const Edge& ed = edges_[e];
            if (ed.source >= vertex_count_ || ed.target >= vertex_count_)
                throw validation_error("edge " + std::to_string(e) + " references vertex outside [0, " +
                                       std::to_string(vertex_count_) + ")");
            if (ed.source == ed.target)
                throw validation_error("edge " + std::to_string(e) + " is a self-loop on vertex " +
                                       std::to_string(ed.source));
            if (!(ed.rate >= 0.0) || !std::isfinite(ed.rate))
                throw validation_error("edge " + std::to_string(e) + " has invalid rate " +
                                       format_double(ed.rate));
        }
        std::vector<std::uint64_t> keys(edges_.size());
        for (std::size_t e = 0; e < edges_.size(); ++e)
            keys[e] = (static_cast<std::uint64_t>(edges_[e].source) << 32) | edges_[e].target;
        std::sort(keys.begin(), keys.end());
        auto dup = std::adjacent_find(keys.begin(), keys.end());
        if (dup != keys.end())
            throw validation_error("duplicate edge " + std::to_string(*dup >> 32) + " -> " +
                                   std::to_string(*dup & 0xffffffffu));
    }

    void build_indexes() {
        in_offsets_.assign(vertex_count_ + 1, 0);
        out_offsets_.assign(vertex_count_ + 1, 0);
        for (const Edge& ed : edges_) {
            ++in_offsets_[ed.target + 1];
            ++out_offsets_[ed.source + 1];
        }
        for (std::uint32_t v = 0; v < vertex_count_; ++v) {
            in_offsets_[v + 1] += in_offsets_[v];
            out_offsets_[v + 1] += out_offsets_[v];
        }
        in_ids_.resize(edges_.size());
        out_ids_.resize(edges_.size());
        std::vector<std::uint32_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
        std::vector<std::uint32_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
        for (std::uint32_t e = 0; e < edges_.size(); ++e) {
            in_ids_[in_fill[edges_[e].target]++] = e;
            out_ids_[out_fill[edges_[e].source]++] = e;
        }
        max_in_rate_ = 0.0;
        for (std::uint32_t v = 0; v < vertex_count_; ++v) {
            double sum = 0.0;
            for (std::uint32_t e : in_edges(v)) sum += edges_[e].rate;
            max_in_rate_ = std::max(max_in_rate_, sum);
        }
    }

    std::uint32_t vertex_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::uint32_t> in_offsets_, in_ids_;
    std::vector<std::uint32_t> out_offsets_, out_ids_;
    double max_in_rate_ = 0.0;
};

inline void validate_opinions(const DirectedNetwork& network, const OpinionVector& opinions) {
    if (opinions.size() != network.vertex_count())
        throw validation_error("opinion vector has " + std::to_string(opinions.size()) +
                               " entries for " + std::to_string(network.vertex_count()) + " vertices");
    for (std::size_t i = 0; i < opinions.size(); ++i)
        if (!(opinions[i] >= 0.0 && opinions[i] <= 1.0))
            throw validation_error("opinion of vertex " + std::to_string(i) + " is " +
                                   format_double(opinions[i]) + ", outside [0, 1]");
}

} // namespace shadowban

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shadowban/common.hpp"
#include "shadowban/network.hpp"

namespace shadowban {

/// Bidirectional path: vertices 0..n-1, opinions linearly spaced
/// from 0 to 1, unit rates, both directions between neighbors.
inline std::pair<DirectedNetwork, OpinionVector> generate_path(std::uint32_t n) {
    if (n < 2) throw std::invalid_argument("generate_path: n must be at least 2, got " + std::to_string(n));
    std::vector<Edge> edges;
    edges.reserve(2 * (n - 1));
    for (std::uint32_t i = 0; i + 1 < n; ++i) {
        edges.push_back({i, i + 1, 1.0});
        edges.push_back({i + 1, i, 1.0});
    }
    OpinionVector opinions(n);
    for (std::uint32_t i = 0; i < n; ++i)
        opinions[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return {DirectedNetwork(n, std::move(edges)), std::move(opinions)};
}

namespace detail {

// Sample ordered pairs from a block of `count` candidates with probability p,
// skipping gaps geometrically so cost is proportional to edges drawn.
template <typename Emit>
void sample_block(std::uint64_t count, double p, std::mt19937_64& gen, Emit&& emit) {
    if (p <= 0.0 || count == 0) return;
    if (p >= 1.0) {
        for (std::uint64_t k = 0; k < count; ++k) emit(k);
        return;
    }
    const double log1mp = std::log1p(-p);
    double k = -1.0;
    while (true) {
        k += 1.0 + std::floor(std::log(uniform01_open(gen)) / log1mp);
        if (k >= static_cast<double>(count)) return;
        emit(static_cast<std::uint64_t>(k));
    }
}

} // namespace detail

/// Directed stochastic block model. Every ordered pair (a, b), a != b,
/// with clusters (c_a, c_b) gets an edge independently with probability
/// p[c_a][c_b]; rates are 1; each vertex takes its cluster's opinion.
/// Deterministic given the seed.
inline std::pair<DirectedNetwork, OpinionVector> generate_sbm(
    const std::vector<std::uint32_t>& cluster_sizes,
    const std::vector<std::vector<double>>& p,
    const std::vector<double>& cluster_opinions,
    std::uint64_t seed) {
    const std::size_t k = cluster_sizes.size();
    if (k == 0) throw std::invalid_argument("generate_sbm: need at least one cluster");
    if (p.size() != k)
        throw std::invalid_argument("generate_sbm: p has " + std::to_string(p.size()) +
                                    " rows for " + std::to_string(k) + " clusters");
    for (const auto& row : p) {
        if (row.size() != k)
            throw std::invalid_argument("generate_sbm: p row has " + std::to_string(row.size()) +
                                        " entries for " + std::to_string(k) + " clusters");
        for (double q : row)
            if (!(q >= 0.0 && q <= 1.0))
                throw std::invalid_argument("generate_sbm: probability " + format_double(q) +
                                            " outside [0, 1]");
    }
    if (cluster_opinions.size() != k)
        throw std::invalid_argument("generate_sbm: " + std::to_string(cluster_opinions.size()) +
                                    " cluster opinions for " + std::to_string(k) + " clusters");
    for (std::uint32_t s : cluster_sizes)
        if (s == 0) throw std::invalid_argument("generate_sbm: cluster sizes must be positive");

    std::vector<std::uint32_t> offset(k + 1, 0);
    for (std::size_t c = 0; c < k; ++c) offset[c + 1] = offset[c] + cluster_sizes[c];
    const std::uint32_t n = offset[k];

    std::mt19937_64 gen(seed);
    std::vector<Edge> edges;
    for (std::size_t ca = 0; ca < k; ++ca) {
        for (std::size_t cb = 0; cb < k; ++cb) {
            const std::uint64_t na = cluster_sizes[ca];
            const std::uint64_t nb = cluster_sizes[cb];
            if (ca == cb) {
                // candidates: ordered pairs (i, j), i != j, inside the cluster
                detail::sample_block(na * (na - 1), p[ca][cb], gen, [&](std::uint64_t idx) {
                    const std::uint32_t i = static_cast<std::uint32_t>(idx / (na - 1));
                    std::uint32_t j = static_cast<std::uint32_t>(idx % (na - 1));
                    if (j >= i) ++j;  // skip the diagonal
                    edges.push_back({offset[ca] + i, offset[ca] + j, 1.0});
                });
            } else {
                detail::sample_block(na * nb, p[ca][cb], gen, [&](std::uint64_t idx) {
                    const std::uint32_t i = static_cast<std::uint32_t>(idx / nb);
                    const std::uint32_t j = static_cast<std::uint32_t>(idx % nb);
                    edges.push_back({offset[ca] + i, offset[cb] + j, 1.0});
                });
            }
        }
    }

    OpinionVector opinions(n);
    for (std::size_t c = 0; c < k; ++c)
        for (std::uint32_t v = offset[c]; v < offset[c + 1]; ++v)
            opinions[v] = cluster_opinions[c];
    return {DirectedNetwork(n, std::move(edges)), std::move(opinions)};
}

/// Erdos-Renyi directed graph: one-cluster SBM.
inline DirectedNetwork generate_er(std::uint32_t n, double p, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("generate_er: n must be positive");
    auto [network, opinions] = generate_sbm({n}, {{p}}, {0.0}, seed);
    (void)opinions;
    return std::move(network);
}

} // namespace shadowban

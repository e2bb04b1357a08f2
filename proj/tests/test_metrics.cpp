#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "shadowban/generate.hpp"
#include "shadowban/metrics.hpp"

using namespace shadowban;

TEST_CASE("quantiles interpolate between order statistics") {
    const std::vector<double> sorted = {1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_sorted(sorted, 0.0) == 1.0);
    CHECK(quantile_sorted(sorted, 1.0) == 4.0);
    CHECK(quantile_sorted(sorted, 0.5) == Catch::Approx(2.5).margin(1e-15));
    CHECK(quantile_sorted(sorted, 0.25) == Catch::Approx(1.75).margin(1e-15));
    CHECK(quantile_sorted(sorted, 0.95) == Catch::Approx(3.85).margin(1e-12));
    CHECK(quantile_sorted({7.0}, 0.3) == 7.0);
    CHECK_THROWS_AS(quantile_sorted({}, 0.5), std::invalid_argument);
}

TEST_CASE("ban rates split vertices at the threshold, ties to the low group") {
    // 0.0 -> 0.5 -> 1.0 chain; ban only the out-edges of the two low vertices
    const DirectedNetwork net(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}});
    const OpinionVector ops = {0.0, 0.5, 1.0};
    ShadowBanPolicy p = ShadowBanPolicy::zero(3, {1.0, 1.0});
    p.u = {1.0, 0.5, 0.0};
    const BanRates r = shadow_ban_rate(net, p, ops);
    REQUIRE(r.low.has_value());
    REQUIRE(r.high.has_value());
    CHECK(*r.low == 1.0);   // vertices 0 and 1 both have a banned out-edge
    CHECK(*r.high == 0.0);  // vertex 2's out-edge is untouched
}

TEST_CASE("a vertex counts as banned only through its out-edges") {
    const DirectedNetwork net(2, {{0, 1, 1.0}});
    ShadowBanPolicy p = ShadowBanPolicy::zero(1, {1.0, 1.0});
    p.u = {0.7};
    const BanRates r = shadow_ban_rate(net, p, {0.2, 0.8});
    CHECK(*r.low == 1.0);
    CHECK(*r.high == 0.0);
}

TEST_CASE("empty partisan groups report no rate") {
    const DirectedNetwork net(2, {{0, 1, 1.0}});
    const ShadowBanPolicy p = ShadowBanPolicy::zero(1, {1.0, 1.0});
    BanRates r = shadow_ban_rate(net, p, {0.1, 0.2});
    CHECK(r.low.has_value());
    CHECK_FALSE(r.high.has_value());
    r = shadow_ban_rate(net, p, {0.9, 0.8});
    CHECK_FALSE(r.low.has_value());
    CHECK(r.high.has_value());
}

TEST_CASE("edge polarity splits banned mass by pull direction") {
    // edges: downward pull (0.2 -> 0.8), upward pull (0.8 -> 0.2), neutral pair
    const DirectedNetwork net(4, {{0, 1, 1.0}, {1, 0, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}});
    const OpinionVector ops = {0.2, 0.8, 0.5, 0.5};
    ShadowBanPolicy p = ShadowBanPolicy::zero(4, {1.0, 1.0});
    p.u = {0.25, 0.75, 0.5, 0.0};
    const EdgePolarityStats s = edge_polarity_ban_stats(net, p, ops);
    CHECK(s.downward_count == 1);
    CHECK(s.downward_mass == 0.25);
    CHECK(s.upward_count == 1);
    CHECK(s.upward_mass == 0.75);
    CHECK(s.neutral_count == 1);
    CHECK(s.neutral_mass == 0.5);
}

TEST_CASE("histogram densities integrate to one") {
    const OpinionVector ops = {0.25, 0.75};
    Histogram h = histogram(ops, 2);
    REQUIRE(h.edges == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(h.density == std::vector<double>{1.0, 1.0});

    h = histogram({0.1, 0.2, 0.9}, 4);
    double integral = 0.0;
    for (double d : h.density) integral += d * 0.25;
    CHECK(integral == Catch::Approx(1.0).margin(1e-12));
    CHECK(h.density[0] == Catch::Approx(2.0 / 3.0 * 4.0).margin(1e-12));
}

TEST_CASE("histogram boundary values") {
    // 1.0 lands in the last bin; bin edges belong to the upper bin otherwise
    Histogram h = histogram({0.0, 0.5, 1.0}, 2);
    CHECK(h.density[0] == Catch::Approx(2.0 / 3.0).margin(1e-12));
    CHECK(h.density[1] == Catch::Approx(4.0 / 3.0).margin(1e-12));
    CHECK_THROWS_AS(histogram({}, 4), std::invalid_argument);
    CHECK_THROWS_AS(histogram({0.5}, 0), std::invalid_argument);
}

TEST_CASE("summarize assembles the trajectory frame") {
    auto [net, ops] = generate_path(11);
    ShadowBanPolicy p = ShadowBanPolicy::zero(net.edge_count(), {0.5, 1.0});
    for (std::size_t e = 0; e < 10; ++e) p.u[e] = 1.0;

    const TrajectoryFrame f = summarize(net, ops, p, 3.0);
    CHECK(f.day == 3.0);
    CHECK(f.mean == Catch::Approx(0.5).margin(1e-15));
    CHECK(f.variance == Catch::Approx(0.11).margin(1e-12));
    CHECK(f.quantiles[2] == Catch::Approx(0.5).margin(1e-15));
    CHECK(f.quantiles[0] == Catch::Approx(0.05).margin(1e-12));
    CHECK(f.quantiles[4] == Catch::Approx(0.95).margin(1e-12));
    CHECK(f.mean_ban_strength == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(f.ban_rate_low.has_value());
    REQUIRE(f.ban_rate_high.has_value());
}

TEST_CASE("summarize rejects empty input and size mismatches") {
    auto [net, ops] = generate_path(3);
    const ShadowBanPolicy p = ShadowBanPolicy::zero(net.edge_count());
    CHECK_THROWS_AS(summarize(net, {}, p, 0.0), std::invalid_argument);
    const ShadowBanPolicy bad = ShadowBanPolicy::zero(2);
    CHECK_THROWS_AS(summarize(net, ops, bad, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(shadow_ban_rate(net, bad, ops), std::invalid_argument);
    CHECK_THROWS_AS(edge_polarity_ban_stats(net, bad, ops), std::invalid_argument);
}

TEST_CASE("quantiles of linearly spaced opinions hit the probabilities") {
    auto [net, ops] = generate_path(101);
    std::vector<double> sorted(ops);
    for (double p : {0.05, 0.25, 0.5, 0.75, 0.95})
        CHECK(quantile_sorted(sorted, p) == Catch::Approx(p).margin(1e-12));
}

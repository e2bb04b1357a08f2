#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shadowban/common.hpp"
#include "shadowban/dynamics.hpp"
#include "shadowban/network.hpp"
#include "shadowban/objectives.hpp"

namespace shadowban {

struct BanBudget {
    double s_network = 0.5;  // cap on the mean ban strength over all edges
    double s_edge = 1.0;     // cap on any single edge's strength

    void validate() const {
        if (!(s_network >= 0.0 && s_network <= 1.0))
            throw std::invalid_argument("s_network must be in [0, 1]");
        if (!(s_edge >= 0.0 && s_edge <= 1.0))
            throw std::invalid_argument("s_edge must be in [0, 1]");
    }
};

/// Per-edge B values aligned with the network's edge sequence.
using EdgeCoefficients = std::vector<double>;

/// Per-edge ban strengths plus the budget and day they were solved under.
struct ShadowBanPolicy {
    std::vector<double> u;
    BanBudget budget;
    double day = 0.0;

    static ShadowBanPolicy zero(std::size_t edge_count, BanBudget b = {}, double day = 0.0) {
        return {std::vector<double>(edge_count, 0.0), b, day};
    }

    double total_strength() const {
        double s = 0.0;
        for (double v : u) s += v;
        return s;
    }

    double mean_strength() const {
        return u.empty() ? 0.0 : total_strength() / static_cast<double>(u.size());
    }

    std::size_t banned_edge_count() const {
        std::size_t c = 0;
        for (double v : u) c += v > 0.0;
        return c;
    }

    void validate() const {
        budget.validate();
        double sum = 0.0;
        for (std::size_t e = 0; e < u.size(); ++e) {
            if (!(u[e] >= 0.0 && u[e] <= budget.s_edge + 1e-12))
                throw validation_error("ban strength " + format_double(u[e]) + " on edge " +
                                       std::to_string(e) + " outside [0, s_edge]");
            sum += u[e];
        }
        if (sum > budget.s_network * static_cast<double>(u.size()) + 1e-9)
            throw validation_error("total ban strength " + format_double(sum) +
                                   " exceeds the network budget");
    }
};

/// B_e = (dr/dtheta_target) * rate_e * f(theta_source - theta_target).
/// Negative B marks edges whose removal raises dr/dt.
inline void compute_coefficients(const DirectedNetwork& network, const OpinionVector& opinions,
                                 ObjectiveKind kind, const DynamicsParams& params,
                                 EdgeCoefficients& out, std::vector<double>& gradient_buffer) {
    if (opinions.size() != network.vertex_count())
        throw std::invalid_argument("opinion vector size mismatch");
    reward_gradient(kind, opinions, gradient_buffer);
    const std::size_t m = network.edge_count();
    out.resize(m);
    const double* theta = opinions.data();
    const double* grad = gradient_buffer.data();
    for (std::size_t e = 0; e < m; ++e) {
        const Edge& ed = network.edge(e);
        out[e] = grad[ed.target] * ed.rate * shift_function(theta[ed.source] - theta[ed.target], params);
    }
}

inline EdgeCoefficients compute_coefficients(const DirectedNetwork& network,
                                             const OpinionVector& opinions, ObjectiveKind kind,
                                             const DynamicsParams& params) {
    EdgeCoefficients out;
    std::vector<double> grad;
    compute_coefficients(network, opinions, kind, params, out, grad);
    return out;
}

/// Exact maximizer of sum B_e*(1-u_e) subject to sum u_e <= s_network*|E|
/// and 0 <= u_e <= s_edge. Fractional knapsack: edges with B < 0 take
/// u = s_edge in ascending-B order (ties by edge index) while budget lasts;
/// the first edge that does not fit takes the remainder; B >= 0 is never banned.
inline ShadowBanPolicy solve_policy(const EdgeCoefficients& coeffs, BanBudget budget,
                                    double day = 0.0) {
    budget.validate();
    for (std::size_t e = 0; e < coeffs.size(); ++e)
        if (!std::isfinite(coeffs[e]))
            throw std::invalid_argument("non-finite coefficient on edge " + std::to_string(e));

    ShadowBanPolicy policy = ShadowBanPolicy::zero(coeffs.size(), budget, day);
    if (budget.s_edge <= 0.0 || budget.s_network <= 0.0 || coeffs.empty()) return policy;

    std::vector<std::uint32_t> negative;
    negative.reserve(coeffs.size());
    for (std::uint32_t e = 0; e < coeffs.size(); ++e)
        if (coeffs[e] < 0.0) negative.push_back(e);
    if (negative.empty()) return policy;

    const double total = budget.s_network * static_cast<double>(coeffs.size());
    auto ascending_b = [&](std::uint32_t a, std::uint32_t b) {
        if (coeffs[a] != coeffs[b]) return coeffs[a] < coeffs[b];
        return a < b;
    };

    std::size_t full = static_cast<std::size_t>(
        std::min(static_cast<double>(negative.size()), std::floor(total / budget.s_edge)));
    if (full >= negative.size()) {
        for (std::uint32_t e : negative) policy.u[e] = budget.s_edge;
        return policy;
    }
    // The k cheapest (most negative) edges get a full ban; the (k+1)-th gets
    // what is left. nth_element under a strict total order selects the same
    // set as a full sort.
    std::nth_element(negative.begin(), negative.begin() + full, negative.end(), ascending_b);
    for (std::size_t i = 0; i < full; ++i) policy.u[negative[i]] = budget.s_edge;
    const double remainder = total - static_cast<double>(full) * budget.s_edge;
    if (remainder > 0.0) policy.u[negative[full]] = std::min(remainder, budget.s_edge);
    return policy;
}

/// dr/dt contribution of a policy: sum B_e*(1-u_e).
inline double policy_objective(const EdgeCoefficients& coeffs, const ShadowBanPolicy& policy) {
    if (coeffs.size() != policy.u.size())
        throw std::invalid_argument("coefficient/policy size mismatch");
    double s = 0.0;
    for (std::size_t e = 0; e < coeffs.size(); ++e) s += coeffs[e] * (1.0 - policy.u[e]);
    return s;
}

namespace detail {

// Dense simplex (maximization, Ax <= b, x >= 0) with Bland's rule.
// Small instances only; used to cross-check the greedy solve.
class Simplex {
public:
    Simplex(std::size_t vars, std::size_t cons)
        : n_(vars), m_(cons), width_(vars + cons + 1), tab_((cons + 1) * width_, 0.0), basis_(cons) {
        for (std::size_t i = 0; i < m_; ++i) {
            at(i, n_ + i) = 1.0;
            basis_[i] = n_ + i;
        }
    }

    double& at(std::size_t row, std::size_t col) { return tab_[row * width_ + col]; }
    void set_constraint(std::size_t row, std::size_t col, double v) { at(row, col) = v; }
    void set_rhs(std::size_t row, double v) { at(row, n_ + m_) = v; }
    void set_objective(std::size_t col, double c) { at(m_, col) = -c; }

    void solve() {
        const double tol = 1e-11;
        for (std::size_t iter = 0; iter < 100000; ++iter) {
            std::size_t enter = width_;
            for (std::size_t j = 0; j + 1 < width_; ++j)
                if (at(m_, j) < -tol) { enter = j; break; }
            if (enter == width_) return;

            std::size_t leave = m_;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, enter);
                if (a > tol) {
                    const double ratio = at(i, n_ + m_) / a;
                    if (leave == m_ || ratio < best_ratio ||
                        (ratio == best_ratio && basis_[i] < basis_[leave])) {
                        leave = i;
                        best_ratio = ratio;
                    }
                }
            }
            if (leave == m_) throw std::runtime_error("simplex: unbounded instance");
            pivot(leave, enter);
        }
        throw std::runtime_error("simplex: iteration limit reached");
    }

    double objective() const { return tab_[m_ * width_ + n_ + m_]; }

    std::vector<double> solution() const {
        std::vector<double> x(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) x[basis_[i]] = tab_[i * width_ + n_ + m_];
        return x;
    }

private:
    void pivot(std::size_t row, std::size_t col) {
        const double p = at(row, col);
        for (std::size_t j = 0; j < width_; ++j) at(row, j) /= p;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == row) continue;
            const double f = at(i, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) at(i, j) -= f * at(row, j);
        }
        basis_[row] = col;
    }

    std::size_t n_, m_, width_;
    std::vector<double> tab_;
    std::vector<std::size_t> basis_;
};

} // namespace detail

/// Independent check of solve_policy on small instances: the same LP posed
/// to a dense simplex. Refuses instances beyond max_edges.
inline ShadowBanPolicy solve_policy_oracle(const EdgeCoefficients& coeffs, BanBudget budget,
                                           double day = 0.0, std::size_t max_edges = 1000) {
    budget.validate();
    if (coeffs.size() > max_edges)
        throw std::invalid_argument("solve_policy_oracle: " + std::to_string(coeffs.size()) +
                                    " edges exceeds the oracle limit " + std::to_string(max_edges));
    const std::size_t m = coeffs.size();
    ShadowBanPolicy policy = ShadowBanPolicy::zero(m, budget, day);
    if (m == 0) return policy;

    // max sum(-B_e)u_e  s.t.  sum u_e <= s_network*m,  u_e <= s_edge
    detail::Simplex lp(m, m + 1);
    for (std::size_t e = 0; e < m; ++e) {
        lp.set_constraint(0, e, 1.0);
        lp.set_constraint(1 + e, e, 1.0);
        lp.set_rhs(1 + e, budget.s_edge);
        lp.set_objective(e, -coeffs[e]);
    }
    lp.set_rhs(0, budget.s_network * static_cast<double>(m));
    lp.solve();

    std::vector<double> x = lp.solution();
    for (std::size_t e = 0; e < m; ++e) policy.u[e] = std::clamp(x[e], 0.0, budget.s_edge);
    return policy;
}

/// Per-edge visibility draw: edge e is invisible with probability u_e.
/// Deterministic given the seed; index order fixed.
inline std::vector<std::uint8_t> realize_stochastic(const ShadowBanPolicy& policy,
                                                    std::uint64_t seed) {
    policy.validate();
    std::mt19937_64 gen(seed);
    std::vector<std::uint8_t> visible(policy.u.size());
    for (std::size_t e = 0; e < policy.u.size(); ++e)
        visible[e] = uniform01(gen) >= policy.u[e] ? 1 : 0;
    return visible;
}

// ShadowBanPolicy-typed entry points for the dynamics operations.
inline void opinion_derivative(const DirectedNetwork& network, const OpinionVector& opinions,
                               const ShadowBanPolicy& policy, const DynamicsParams& params,
                               std::vector<double>& out) {
    opinion_derivative(network, opinions, std::span<const double>(policy.u), params, out);
}

inline std::vector<double> opinion_derivative(const DirectedNetwork& network,
                                              const OpinionVector& opinions,
                                              const ShadowBanPolicy& policy,
                                              const DynamicsParams& params) {
    return opinion_derivative(network, opinions, std::span<const double>(policy.u), params);
}

inline OpinionVector step_euler(const DirectedNetwork& network, const OpinionVector& opinions,
                                const ShadowBanPolicy& policy, const DynamicsParams& params,
                                double dt) {
    return step_euler(network, opinions, std::span<const double>(policy.u), params, dt);
}

inline OpinionVector simulate_discrete_events(const DirectedNetwork& network,
                                              const OpinionVector& opinions,
                                              const ShadowBanPolicy& policy,
                                              const DynamicsParams& params, double horizon,
                                              std::uint64_t seed) {
    return simulate_discrete_events(network, opinions, std::span<const double>(policy.u), params,
                                    horizon, seed);
}

} // namespace shadowban

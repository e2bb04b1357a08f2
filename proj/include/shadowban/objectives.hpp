#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "shadowban/network.hpp"

namespace shadowban {

enum class ObjectiveKind {
    MaximizeMean,
    MinimizeVariance,
    MaximizeVariance,
};

inline const char* objective_token(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::MaximizeMean: return "max-mean";
        case ObjectiveKind::MinimizeVariance: return "min-var";
        case ObjectiveKind::MaximizeVariance: return "max-var";
    }
    throw std::invalid_argument("unknown objective kind");
}

inline ObjectiveKind parse_objective(const std::string& token) {
    if (token == "max-mean") return ObjectiveKind::MaximizeMean;
    if (token == "min-var") return ObjectiveKind::MinimizeVariance;
    if (token == "max-var") return ObjectiveKind::MaximizeVariance;
    throw std::invalid_argument("unknown objective `" + token +
                                "` (expected max-mean, min-var, or max-var)");
}

namespace detail {

inline void check_objective_size(ObjectiveKind kind, std::size_t n) {
    if (n == 0) throw std::invalid_argument("objective requires a nonempty opinion vector");
    if (kind != ObjectiveKind::MaximizeMean && n < 2)
        throw std::invalid_argument("variance objectives require at least 2 opinions, got " +
                                    std::to_string(n));
}

inline double opinion_mean(const OpinionVector& opinions) {
    double s = 0.0;
    for (double v : opinions) s += v;
    return s / static_cast<double>(opinions.size());
}

inline double sample_variance(const OpinionVector& opinions) {
    const double mu = opinion_mean(opinions);
    double s = 0.0;
    for (double v : opinions) s += (v - mu) * (v - mu);
    return s / static_cast<double>(opinions.size() - 1);
}

} // namespace detail

/// r(theta): mean for MaximizeMean; +/- sample variance (1/(|V|-1))
/// for the variance objectives, MinimizeVariance carrying the minus sign.
inline double reward(ObjectiveKind kind, const OpinionVector& opinions) {
    detail::check_objective_size(kind, opinions.size());
    switch (kind) {
        case ObjectiveKind::MaximizeMean: return detail::opinion_mean(opinions);
        case ObjectiveKind::MinimizeVariance: return -detail::sample_variance(opinions);
        case ObjectiveKind::MaximizeVariance: return detail::sample_variance(opinions);
    }
    throw std::invalid_argument("unknown objective kind");
}

/// dr/dtheta_i into `out`: 1/|V| per component for the mean objective,
/// -/+ 2(theta_i - mu)/(|V|-1) for the variance objectives.
inline void reward_gradient(ObjectiveKind kind, const OpinionVector& opinions, std::vector<double>& out) {
    const std::size_t n = opinions.size();
    detail::check_objective_size(kind, n);
    out.resize(n);
    if (kind == ObjectiveKind::MaximizeMean) {
        const double g = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = g;
        return;
    }
    const double mu = detail::opinion_mean(opinions);
    const double scale = (kind == ObjectiveKind::MinimizeVariance ? -2.0 : 2.0) /
                         static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = scale * (opinions[i] - mu);
}

inline std::vector<double> reward_gradient(ObjectiveKind kind, const OpinionVector& opinions) {
    std::vector<double> out;
    reward_gradient(kind, opinions, out);
    return out;
}

} // namespace shadowban

#pragma once
// Scheduling policies as pure functions of (kind, statistics, instance, slot,
// random stream).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qbandit/core.hpp"
#include "qbandit/matching.hpp"
#include "qbandit/random.hpp"

namespace qbandit {

class UnsampledArm : public std::domain_error {
public:
    UnsampledArm() : std::domain_error("UnsampledArm: UCB index requires at least one trial") {}
};

// Per-link assignment counts T_uk and observed successes S_uk.
struct CountStats {
    std::size_t queues = 0;
    std::size_t servers = 0;
    std::vector<std::int64_t> trials;
    std::vector<std::int64_t> successes;

    CountStats() = default;
    CountStats(std::size_t U, std::size_t K) : queues(U), servers(K), trials(U * K, 0), successes(U * K, 0) {}

    std::int64_t T(std::size_t u, std::size_t k) const { return trials[u * servers + k]; }
    std::int64_t S(std::size_t u, std::size_t k) const { return successes[u * servers + k]; }
    double mean(std::size_t u, std::size_t k) const {
        return T(u, k) == 0 ? 0.0 : static_cast<double>(S(u, k)) / static_cast<double>(T(u, k));
    }

    friend bool operator==(const CountStats&, const CountStats&) = default;
};

enum class PolicyType { QThS, Thompson, UCB1, QUCB, Genie, Uniform };

struct PolicyKind {
    PolicyType type = PolicyType::QThS;
    double explore_const = 3.0;

    static PolicyKind qths(double c = 3.0) { return {PolicyType::QThS, c}; }
    static PolicyKind thompson() { return {PolicyType::Thompson, 0.0}; }
    static PolicyKind ucb1() { return {PolicyType::UCB1, 0.0}; }
    static PolicyKind qucb(double c = 3.0) { return {PolicyType::QUCB, c}; }
    static PolicyKind genie() { return {PolicyType::Genie, 0.0}; }
    static PolicyKind uniform() { return {PolicyType::Uniform, 0.0}; }

    bool gated() const { return type == PolicyType::QThS || type == PolicyType::QUCB; }
    bool ucb() const { return type == PolicyType::UCB1 || type == PolicyType::QUCB; }

    friend bool operator==(const PolicyKind&, const PolicyKind&) = default;
};

// Configuration names: "qths" | "thompson" | "ucb1" | "qucb" | "genie" | "uniform".
inline std::string_view policy_name(PolicyType t) {
    switch (t) {
    case PolicyType::QThS: return "qths";
    case PolicyType::Thompson: return "thompson";
    case PolicyType::UCB1: return "ucb1";
    case PolicyType::QUCB: return "qucb";
    case PolicyType::Genie: return "genie";
    case PolicyType::Uniform: return "uniform";
    }
    return "unknown";
}

inline std::optional<PolicyType> parse_policy_type(std::string_view name) {
    for (auto t : {PolicyType::QThS, PolicyType::Thompson, PolicyType::UCB1, PolicyType::QUCB, PolicyType::Genie,
                   PolicyType::Uniform})
        if (policy_name(t) == name) return t;
    return std::nullopt;
}

inline void check_policy(const PolicyKind& kind) {
    if (kind.gated() && !(std::isfinite(kind.explore_const) && kind.explore_const >= 0.0))
        throw std::invalid_argument("explore_const must be a finite non-negative number");
}

/// min{1, c K ln^2(t) / t}.
inline double explore_probability(Slot t, std::size_t K, double c) {
    if (t < 1) throw std::invalid_argument("explore_probability: t must be >= 1");
    const double lt = std::log(static_cast<double>(t));
    const double p = c * static_cast<double>(K) * lt * lt / static_cast<double>(t);
    return p < 1.0 ? p : 1.0;
}

/// The exploration gate E(t). A draw is consumed only when 0 < p < 1.
inline bool explore_gate(Slot t, std::size_t K, double c, RandomStream& rng) {
    const double p = explore_probability(t, K, c);
    return p >= 1.0 || (p > 0.0 && rng.bernoulli(p));
}

/// Posterior draw Beta(successes + 1, failures + 1) under a uniform prior.
inline double thompson_sample(std::int64_t successes, std::int64_t trials, RandomStream& rng) {
    if (successes < 0 || successes > trials) throw std::invalid_argument("thompson_sample: need 0 <= successes <= trials");
    return rng.beta(static_cast<double>(successes + 1), static_cast<double>(trials - successes + 1));
}

/// UCB-1: empirical mean + sqrt(2 ln t / trials).
inline double ucb_index(std::int64_t successes, std::int64_t trials, Slot t) {
    if (trials < 1) throw UnsampledArm();
    const double n = static_cast<double>(trials);
    return static_cast<double>(successes) / n + std::sqrt(2.0 * std::log(static_cast<double>(t)) / n);
}

struct Decision {
    Matching schedule;
    bool explored = false;
};

namespace detail {

inline std::vector<std::size_t> favourite_servers(const PolicyKind& kind, const CountStats& stats, Slot t,
                                                  RandomStream& rng) {
    const std::size_t U = stats.queues, K = stats.servers;
    std::vector<std::size_t> khat(U, 0);
    for (std::size_t u = 0; u < U; ++u) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            const double score = kind.ucb() ? ucb_index(stats.S(u, k), stats.T(u, k), t)
                                            : thompson_sample(stats.S(u, k), stats.T(u, k), rng);
            // strict > keeps the lowest index on ties
            if (score > best) {
                best = score;
                khat[u] = k;
            }
        }
    }
    return khat;
}

} // namespace detail

inline Decision policy_decide(const PolicyKind& kind, const CountStats& stats, const ProblemInstance& inst, Slot t,
                              RandomStream& rng) {
    const std::size_t U = inst.queues(), K = inst.servers();
    if (t < 1) throw std::invalid_argument("policy_decide: t must be >= 1");
    switch (kind.type) {
    case PolicyType::Genie:
        return {Matching{inst.derived().k_star}, false};
    case PolicyType::Uniform:
        return {exploration_matching(U, K, rng.index(K)), true};
    default:
        break;
    }
    // UCB variants walk the exploration set once so that every link is sampled.
    if (kind.ucb() && t <= static_cast<Slot>(K))
        return {exploration_matching(U, K, static_cast<std::size_t>(t - 1)), true};
    if (kind.gated()) {
        if (explore_gate(t, K, kind.explore_const, rng)) return {exploration_matching(U, K, rng.index(K)), true};
    }
    return {project_to_matching(detail::favourite_servers(kind, stats, t, rng), U, K), false};
}

/// Bandit feedback: only the scheduled links are observed.
inline CountStats policy_update(CountStats stats, const Matching& schedule, const Flags& services) {
    for (std::size_t u = 0; u < schedule.assign.size(); ++u) {
        const std::size_t idx = u * stats.servers + schedule.assign[u];
        stats.trials[idx] += 1;
        stats.successes[idx] += services[u] ? 1 : 0;
    }
    return stats;
}

} // namespace qbandit

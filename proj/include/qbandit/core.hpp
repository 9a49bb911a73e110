#pragma once
// Problem instances, queue dynamics and the per-slot trace record.
//
// Indices are 0-based throughout the library: queue u in [0, U), server k in
// [0, K). Output files print 1-based queue labels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qbandit {

using Length = std::int64_t;
using Slot = std::int64_t;
using Flags = std::vector<std::uint8_t>;

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

enum class InstanceErrc {
    DimensionMismatch,
    RateOutOfRange,
    NonUniqueOptimum,
    OptimaNotMatching,
    Unstable,
};

inline const char* to_string(InstanceErrc e) {
    switch (e) {
    case InstanceErrc::DimensionMismatch: return "DimensionMismatch";
    case InstanceErrc::RateOutOfRange: return "RateOutOfRange";
    case InstanceErrc::NonUniqueOptimum: return "NonUniqueOptimum";
    case InstanceErrc::OptimaNotMatching: return "OptimaNotMatching";
    case InstanceErrc::Unstable: return "Unstable";
    }
    return "Unknown";
}

class InstanceError : public std::runtime_error {
public:
    InstanceError(InstanceErrc code, std::size_t queue, std::size_t server, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), queue_(queue),
          server_(server) {}

    InstanceErrc code() const noexcept { return code_; }
    // Offending queue / server, kNoIndex when not applicable.
    std::size_t queue() const noexcept { return queue_; }
    std::size_t server() const noexcept { return server_; }

private:
    InstanceErrc code_;
    std::size_t queue_;
    std::size_t server_;
};

struct DerivedParams {
    std::vector<std::size_t> k_star;
    std::vector<double> mu_star;
    std::vector<double> eps;
    double delta = 0.0;
    double mu_min = 0.0;
    double mu_max = 0.0;
    double lambda_min = 0.0;
    double eps_bar = 0.0;
};

// A validated instance. Only validate_instance() constructs one, so holding a
// ProblemInstance means every structural condition holds.
class ProblemInstance {
public:
    std::size_t queues() const noexcept { return lambda_.size(); }
    std::size_t servers() const noexcept { return servers_; }
    double lambda(std::size_t u) const { return lambda_[u]; }
    const std::vector<double>& lambdas() const noexcept { return lambda_; }
    double mu(std::size_t u, std::size_t k) const { return mu_[u * servers_ + k]; }
    std::vector<double> mu_row(std::size_t u) const {
        return {mu_.begin() + static_cast<std::ptrdiff_t>(u * servers_),
                mu_.begin() + static_cast<std::ptrdiff_t>((u + 1) * servers_)};
    }
    const DerivedParams& derived() const noexcept { return derived_; }
    std::size_t k_star(std::size_t u) const { return derived_.k_star[u]; }
    double mu_star(std::size_t u) const { return derived_.mu_star[u]; }
    double eps(std::size_t u) const { return derived_.eps[u]; }
    // Delta_uk = mu*_u - mu_uk.
    double gap(std::size_t u, std::size_t k) const { return mu_star(u) - mu(u, k); }

private:
    friend ProblemInstance validate_instance(std::size_t, std::size_t, std::vector<double>,
                                             std::vector<std::vector<double>>);
    std::size_t servers_ = 0;
    std::vector<double> lambda_;
    std::vector<double> mu_;
    DerivedParams derived_;
};

inline ProblemInstance validate_instance(std::size_t U, std::size_t K, std::vector<double> lambda,
                                         std::vector<std::vector<double>> mu) {
    using E = InstanceErrc;
    if (U == 0 || K == 0 || U > K)
        throw InstanceError(E::DimensionMismatch, kNoIndex, kNoIndex, "need 1 <= U <= K");
    if (lambda.size() != U)
        throw InstanceError(E::DimensionMismatch, kNoIndex, kNoIndex, "lambda must have U entries");
    if (mu.size() != U)
        throw InstanceError(E::DimensionMismatch, kNoIndex, kNoIndex, "mu must have U rows");
    for (std::size_t u = 0; u < U; ++u)
        if (mu[u].size() != K)
            throw InstanceError(E::DimensionMismatch, u, kNoIndex,
                                "mu row " + std::to_string(u) + " must have K entries");

    auto in_open_unit = [](double x) { return std::isfinite(x) && x > 0.0 && x < 1.0; };
    for (std::size_t u = 0; u < U; ++u) {
        if (!in_open_unit(lambda[u]))
            throw InstanceError(E::RateOutOfRange, u, kNoIndex,
                                "lambda[" + std::to_string(u) + "] not in (0,1)");
        for (std::size_t k = 0; k < K; ++k)
            if (!in_open_unit(mu[u][k]))
                throw InstanceError(E::RateOutOfRange, u, k,
                                    "mu[" + std::to_string(u) + "][" + std::to_string(k) + "] not in (0,1)");
    }

    DerivedParams d;
    d.k_star.resize(U);
    d.mu_star.resize(U);
    d.eps.resize(U);
    d.delta = std::numeric_limits<double>::infinity();
    d.mu_min = 1.0;
    d.mu_max = 0.0;
    for (std::size_t u = 0; u < U; ++u) {
        const auto& row = mu[u];
        const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        for (std::size_t k = 0; k < K; ++k)
            if (k != best && row[k] == row[best])
                throw InstanceError(E::NonUniqueOptimum, u, k,
                                    "queue " + std::to_string(u) + " has tied optimal servers " +
                                        std::to_string(best) + " and " + std::to_string(k));
        d.k_star[u] = best;
        d.mu_star[u] = row[best];
        for (std::size_t k = 0; k < K; ++k) {
            if (k != best) d.delta = std::min(d.delta, row[best] - row[k]);
            d.mu_min = std::min(d.mu_min, row[k]);
            d.mu_max = std::max(d.mu_max, row[k]);
        }
    }
    for (std::size_t u = 0; u < U; ++u)
        for (std::size_t v = 0; v < u; ++v)
            if (d.k_star[u] == d.k_star[v])
                throw InstanceError(E::OptimaNotMatching, u, d.k_star[u],
                                    "queues " + std::to_string(v) + " and " + std::to_string(u) +
                                        " share optimal server " + std::to_string(d.k_star[u]));
    double eps_sum = 0.0;
    d.lambda_min = 1.0;
    for (std::size_t u = 0; u < U; ++u) {
        d.eps[u] = d.mu_star[u] - lambda[u];
        if (!(d.eps[u] > 0.0))
            throw InstanceError(E::Unstable, u, kNoIndex,
                                "queue " + std::to_string(u) + " has eps = " + std::to_string(d.eps[u]) + " <= 0");
        eps_sum += d.eps[u];
        d.lambda_min = std::min(d.lambda_min, lambda[u]);
    }
    d.eps_bar = eps_sum / static_cast<double>(U);
    // K == 1 leaves no suboptimal server; the gap is then undefined.
    if (K == 1) d.delta = std::numeric_limits<double>::quiet_NaN();

    ProblemInstance inst;
    inst.servers_ = K;
    inst.lambda_ = std::move(lambda);
    inst.mu_.reserve(U * K);
    for (const auto& row : mu) inst.mu_.insert(inst.mu_.end(), row.begin(), row.end());
    inst.derived_ = std::move(d);
    return inst;
}

/// Queue update with same-slot service: max(q + a - s, 0).
constexpr Length lindley_step(Length q, bool arrival, bool service) noexcept {
    const Length next = q + (arrival ? 1 : 0) - (service ? 1 : 0);
    return next > 0 ? next : 0;
}

struct TraceRecord {
    Slot t = 0;
    std::vector<std::size_t> schedule;
    bool explored = false;
    Flags arrivals;
    Flags services;
    std::vector<Length> bandit_q;
    std::vector<Length> genie_q;
};

// {"U": int, "K": int, "lambda": [..], "mu": [[..]]}
inline ProblemInstance instance_from_json(const nlohmann::json& j) {
    using E = InstanceErrc;
    if (!j.is_object()) throw InstanceError(E::DimensionMismatch, kNoIndex, kNoIndex, "instance must be an object");
    for (const auto& [key, _] : j.items())
        if (key != "U" && key != "K" && key != "lambda" && key != "mu")
            throw InstanceError(E::DimensionMismatch, kNoIndex, kNoIndex, "unknown instance key '" + key + "'");
    for (const char* key : {"U", "K", "lambda", "mu"})
        if (!j.contains(key))
            throw InstanceError(E::DimensionMismatch, kNoIndex, kNoIndex, std::string("missing key '") + key + "'");
    try {
        return validate_instance(j.at("U").get<std::size_t>(), j.at("K").get<std::size_t>(),
                                 j.at("lambda").get<std::vector<double>>(),
                                 j.at("mu").get<std::vector<std::vector<double>>>());
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(E::DimensionMismatch, kNoIndex, kNoIndex, std::string("malformed instance: ") + e.what());
    }
}

inline nlohmann::json instance_to_json(const ProblemInstance& inst) {
    nlohmann::json mu = nlohmann::json::array();
    for (std::size_t u = 0; u < inst.queues(); ++u) mu.push_back(inst.mu_row(u));
    return {{"U", inst.queues()}, {"K", inst.servers()}, {"lambda", inst.lambdas()}, {"mu", mu}};
}

} // namespace qbandit

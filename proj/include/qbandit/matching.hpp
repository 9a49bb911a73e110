#pragma once
// Queue-to-server matchings: the cyclic exploration set and the Hamming
// projection of per-queue favourites onto the set of matchings.

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qbandit {

// assign[u] is the server scheduled for queue u; injective by construction.
struct Matching {
    std::vector<std::size_t> assign;

    friend bool operator==(const Matching&, const Matching&) = default;
};

inline bool is_matching(const std::vector<std::size_t>& assign, std::size_t K) {
    std::vector<bool> used(K, false);
    for (auto k : assign) {
        if (k >= K || used[k]) return false;
        used[k] = true;
    }
    return true;
}

inline std::size_t hamming_distance(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::size_t d = 0;
    for (std::size_t u = 0; u < a.size(); ++u) d += a[u] != b[u] ? 1 : 0;
    return d;
}

/// j-th cyclic shift: queue u -> server (u + j) mod K.
inline Matching exploration_matching(std::size_t U, std::size_t K, std::size_t j) {
    Matching m;
    m.assign.resize(U);
    for (std::size_t u = 0; u < U; ++u) m.assign[u] = (u + j) % K;
    return m;
}

/// The K cyclic shifts; every (queue, server) link appears in exactly one.
inline std::vector<Matching> exploration_matchings(std::size_t U, std::size_t K) {
    if (U == 0 || U > K) throw std::invalid_argument("exploration_matchings: need 1 <= U <= K");
    std::vector<Matching> out;
    out.reserve(K);
    for (std::size_t j = 0; j < K; ++j) out.push_back(exploration_matching(U, K, j));
    return out;
}

// Minimum-cost assignment of U rows to K >= U columns (Hungarian method with
// potentials, O(U^2 K)). Returns the column chosen for each row.
inline std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    if (n == 0) return {};
    const std::size_t m = cost.front().size();
    if (m < n) throw std::invalid_argument("min_cost_assignment: more rows than columns");
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based arrays; column 0 is the virtual start.
    std::vector<double> pu(n + 1, 0.0), pv(m + 1, 0.0);
    std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        owner[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = owner[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - pu[i0] - pv[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    pu[owner[j]] += delta;
                    pv[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (owner[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> result(n, 0);
    for (std::size_t j = 1; j <= m; ++j)
        if (owner[j] != 0) result[owner[j] - 1] = j - 1;
    return result;
}

/// Minimum Hamming distance from khat to any matching, via the assignment solver.
inline std::size_t min_hamming_assignment(const std::vector<std::size_t>& khat, std::size_t K) {
    std::vector<std::vector<double>> cost(khat.size(), std::vector<double>(K, 1.0));
    for (std::size_t u = 0; u < khat.size(); ++u) cost[u][khat[u]] = 0.0;
    return hamming_distance(min_cost_assignment(cost), khat);
}

/// Exact minimum over all K!/(K-U)! matchings. Test oracle; K <= 8.
inline std::size_t min_hamming_bruteforce(const std::vector<std::size_t>& khat, std::size_t U, std::size_t K) {
    if (K > 8) throw std::length_error("min_hamming_bruteforce: SizeTooLarge (K > 8)");
    if (U == 0 || U > K || khat.size() != U) throw std::invalid_argument("min_hamming_bruteforce: bad dimensions");
    // Enumerate permutations of [0, K); the first U entries form a matching.
    // Each matching is visited (K-U)! times, which is harmless at K <= 8.
    std::vector<std::size_t> perm(K);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::size_t best = U;
    do {
        std::size_t d = 0;
        for (std::size_t u = 0; u < U; ++u) d += perm[u] != khat[u] ? 1 : 0;
        best = std::min(best, d);
    } while (best > 0 && std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Nearest matching to khat in Hamming distance. Queues are scanned in order
/// and keep their favourite while it is free; the rest take the lowest free
/// servers in queue order.
inline Matching project_to_matching(const std::vector<std::size_t>& khat, std::size_t U, std::size_t K) {
    if (khat.size() != U || U > K) throw std::invalid_argument("project_to_matching: bad dimensions");
    Matching m;
    m.assign.assign(U, K);
    std::vector<bool> taken(K, false);
    for (std::size_t u = 0; u < U; ++u) {
        if (khat[u] >= K) throw std::out_of_range("project_to_matching: server index out of range");
        if (!taken[khat[u]]) {
            m.assign[u] = khat[u];
            taken[khat[u]] = true;
        }
    }
    std::size_t next_free = 0;
    for (std::size_t u = 0; u < U; ++u) {
        if (m.assign[u] != K) continue;
        while (taken[next_free]) ++next_free;
        m.assign[u] = next_free;
        taken[next_free] = true;
    }
    assert(U == 1 || hamming_distance(m.assign, khat) == min_hamming_assignment(khat, K));
    return m;
}

} // namespace qbandit

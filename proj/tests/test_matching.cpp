#include <gtest/gtest.h>

#include <set>

#include "qbandit/matching.hpp"
#include "qbandit/random.hpp"

using namespace qbandit;

using V = std::vector<std::size_t>;

TEST(Exploration, Examples) {
    const auto a = exploration_matchings(1, 3);
    ASSERT_EQ(a.size(), 3u);
    EXPECT_EQ(a[0].assign, V{0});
    EXPECT_EQ(a[2].assign, V{2});
    const auto b = exploration_matchings(2, 3);
    EXPECT_EQ(b[0].assign, (V{0, 1}));
    EXPECT_EQ(b[1].assign, (V{1, 2}));
    EXPECT_EQ(b[2].assign, (V{2, 0}));
    const auto c = exploration_matchings(2, 2);
    EXPECT_EQ(c[0].assign, (V{0, 1}));
    EXPECT_EQ(c[1].assign, (V{1, 0}));
    EXPECT_THROW(exploration_matchings(3, 2), std::invalid_argument);
}

TEST(Exploration, CoversEveryLinkOnce) {
    for (std::size_t K = 1; K <= 7; ++K)
        for (std::size_t U = 1; U <= K; ++U) {
            std::multiset<std::pair<std::size_t, std::size_t>> links;
            for (const auto& m : exploration_matchings(U, K)) {
                EXPECT_TRUE(is_matching(m.assign, K));
                for (std::size_t u = 0; u < U; ++u) links.insert({u, m.assign[u]});
            }
            EXPECT_EQ(links.size(), U * K);
            EXPECT_EQ(std::set(links.begin(), links.end()).size(), U * K);
        }
}

TEST(Projection, Examples) {
    EXPECT_EQ(project_to_matching({2, 0, 1}, 3, 3).assign, (V{2, 0, 1}));
    EXPECT_EQ(project_to_matching({0, 0}, 2, 2).assign, (V{0, 1}));
    EXPECT_EQ(project_to_matching({1, 1, 2}, 3, 3).assign, (V{1, 0, 2}));
    EXPECT_EQ(hamming_distance(project_to_matching({1, 1, 2}, 3, 3).assign, {1, 1, 2}), 1u);
}

TEST(Projection, Errors) {
    EXPECT_THROW(project_to_matching({0, 1}, 3, 3), std::invalid_argument);
    EXPECT_THROW(project_to_matching({0, 5}, 2, 3), std::out_of_range);
}

TEST(BruteForce, Examples) {
    EXPECT_EQ(min_hamming_bruteforce({3, 1, 0}, 3, 4), 0u);
    EXPECT_EQ(min_hamming_bruteforce({2, 2, 2, 2}, 4, 4), 3u);
    EXPECT_EQ(min_hamming_bruteforce({1, 1, 2}, 3, 3), 1u);
    EXPECT_THROW(min_hamming_bruteforce({0}, 1, 9), std::length_error);
}

TEST(Projection, MatchesBruteForceExhaustive) {
    for (std::size_t K = 1; K <= 4; ++K)
        for (std::size_t U = 1; U <= K; ++U) {
            V khat(U, 0);
            for (;;) {
                const auto m = project_to_matching(khat, U, K);
                ASSERT_TRUE(is_matching(m.assign, K));
                ASSERT_EQ(hamming_distance(m.assign, khat), min_hamming_bruteforce(khat, U, K));
                std::size_t i = 0;
                while (i < U && ++khat[i] == K) khat[i++] = 0;
                if (i == U) break;
            }
        }
}

TEST(Projection, MatchesBruteForceRandom) {
    RandomStream rng(7);
    for (int i = 0; i < 2000; ++i) {
        const std::size_t K = 1 + rng.index(8), U = 1 + rng.index(K);
        V khat(U);
        for (auto& k : khat) k = rng.index(K);
        const auto m = project_to_matching(khat, U, K);
        ASSERT_TRUE(is_matching(m.assign, K));
        ASSERT_EQ(hamming_distance(m.assign, khat), min_hamming_bruteforce(khat, U, K));
        ASSERT_EQ(min_hamming_assignment(khat, K), min_hamming_bruteforce(khat, U, K));
    }
}

TEST(Assignment, SmallCostMatrix) {
    // rectangular 2x3: best is row0->col2 (1), row1->col0 (2)
    const std::vector<std::vector<double>> cost{{4, 3, 1}, {2, 5, 6}};
    EXPECT_EQ(min_cost_assignment(cost), (V{2, 0}));
}

TEST(Matching, Validity) {
    EXPECT_TRUE(is_matching({0, 2}, 3));
    EXPECT_FALSE(is_matching({1, 1}, 3));
    EXPECT_FALSE(is_matching({3}, 3));
}

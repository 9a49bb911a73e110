#include <gtest/gtest.h>

#include <cmath>

#include "qbandit/bounds.hpp"

using namespace qbandit;

namespace {

ProblemInstance k5() { return validate_instance(1, 5, {0.55}, {{0.65, 0.48, 0.40, 0.30, 0.20}}); }

// K = 100, mu* = 0.65, second best 0.48, the rest spread down to 0.2; eps = 1e-3.
ProblemInstance wide() {
    std::vector<double> row{0.65, 0.48};
    for (int k = 2; k < 100; ++k) row.push_back(0.48 - 0.28 * (k - 1) / 98.0);
    return validate_instance(1, 100, {0.649}, {row});
}

} // namespace

TEST(Kl, Examples) {
    EXPECT_EQ(bernoulli_kl(0.5, 0.5), 0.0);
    EXPECT_NEAR(bernoulli_kl(0.25, 0.75), 0.549306144, 1e-9);
    EXPECT_NEAR(bernoulli_kl(0.25, 0.75), 0.5 * std::log(3.0), 1e-12);
    EXPECT_NEAR(bernoulli_kl(0.2, 0.825), 0.932447399, 1e-9);
    EXPECT_NEAR(bernoulli_kl(0.4, 0.8), 0.381908501, 1e-9);
    EXPECT_NEAR(bernoulli_kl(0.0, 0.5), std::log(2.0), 1e-12);
    EXPECT_THROW(bernoulli_kl(0.3, 1.0), DivergentKL);
    EXPECT_THROW(bernoulli_kl(0.3, 0.0), DivergentKL);
    EXPECT_EQ(bernoulli_kl(1.0, 1.0), 0.0);
}

TEST(Kl, NonNegativeOnGrid) {
    for (int i = 0; i <= 20; ++i)
        for (int j = 1; j < 20; ++j) {
            const double p = i / 20.0, q = j / 20.0;
            const double kl = bernoulli_kl(p, q);
            if (i == j) EXPECT_EQ(kl, 0.0);
            else EXPECT_GT(kl, 0.0) << p << " " << q;
        }
}

TEST(DMu, Examples) {
    EXPECT_NEAR(d_mu(k5()), 0.182315914, 1e-9);
    EXPECT_NEAR(d_mu(validate_instance(1, 2, {0.5}, {{0.6, 0.4}})), 0.523685646, 1e-9);
    // small gap -> small D
    const auto tiny = validate_instance(1, 2, {0.5}, {{0.6, 0.6 - 1e-9}});
    EXPECT_LT(d_mu(tiny), 1e-8);
    EXPECT_GT(d_mu(tiny), 0.0);
}

TEST(LateStage, Examples) {
    EXPECT_NEAR(late_stage_lb(k5(), 0.5, 1e4), 5.01368764e-6, 1e-13);
    EXPECT_NEAR(late_stage_lb(k5(), 1.0 - 1e-12, 1e4), 0.0, 1e-16);
    for (double t : {1.0, 7.0, 1e3, 12345.0})
        EXPECT_NEAR(late_stage_lb(k5(), 0.3, 2 * t), late_stage_lb(k5(), 0.3, t) / 2, 1e-18);
    EXPECT_THROW(late_stage_lb(k5(), 0.5, 0.5), std::invalid_argument);
}

TEST(LateStage, MultiQueueForms) {
    const auto inst = validate_instance(2, 4, {0.3, 0.4}, {{0.6, 0.3, 0.2, 0.1}, {0.1, 0.6, 0.3, 0.2}});
    const double D = d_mu(inst);
    EXPECT_NEAR(late_stage_lb(inst, 0.5, 100, BoundForm::Averaged), 0.3 / 8 * D * 0.5 * 3 / 100, 1e-15);
    EXPECT_NEAR(late_stage_lb(inst, 0.5, 100, BoundForm::PerQueue), 0.3 / 8 * D * 0.5 * 4 / 100, 1e-15);
}

TEST(EarlyStage, Examples) {
    const auto b = early_stage_lb(k5(), 0.5, 3.0, 3.5);
    EXPECT_NEAR(b.window.right, 3.64631828, 1e-8);
    EXPECT_NEAR(b.window.right, 4 * d_mu(k5()) / (2 * 0.1), 1e-12);
    EXPECT_TRUE(b.in_window);
    EXPECT_FALSE(early_stage_lb(k5(), 0.5, 3.0, 10).in_window);
    const double ee = std::exp(std::exp(1.0));
    EXPECT_NEAR(early_stage_lb(k5(), 0.5, 3.0, ee).value, 0.991172073, 1e-8);
    EXPECT_NEAR(early_stage_lb(k5(), 0.5, 3.0, ee).value, d_mu(k5()) / 2 * 4 * std::exp(1.0), 1e-12);

    const auto w = wide();
    const auto bw = early_stage_lb(w, 0.5, 3.0, 100);
    EXPECT_NEAR(bw.window.right, 99 * d_mu(w) / (2 * w.eps(0)), 1e-6);
    EXPECT_GT(bw.window.right, 1e3);
}

TEST(EarlyStage, Errors) {
    EXPECT_THROW(early_stage_lb(k5(), 0.5, 2.0, 10), std::invalid_argument);
    EXPECT_THROW(early_stage_lb(k5(), 0.5, 3.0, 2.9), std::invalid_argument);
    const auto light = validate_instance(1, 2, {0.1}, {{0.65, 0.48}});
    EXPECT_THROW(early_stage_lb(light, 0.5, 3.0, 10), WindowEmpty);
}

TEST(ThsUpper, Examples) {
    const auto r = ths_upper_terms(k5(), 1e6);
    EXPECT_NEAR(r.log_w, 29.78278746, 1e-7);
    EXPECT_NEAR(r.w, std::exp(29.78278746), 1e6);
    EXPECT_NEAR(r.log_t_threshold, 207.6124567, 1e-6);
    EXPECT_FALSE(r.budget_condition);
    EXPECT_FALSE(r.t_condition);
    EXPECT_FALSE(r.valid());
    EXPECT_NEAR(r.v_prime, 6 * 5 / 0.1 * r.w, 1e-6 * r.v_prime);
    EXPECT_NEAR(ths_order(k5(), 1e5).bound, 7.63004472, 1e-7);
}

TEST(ThsUpper, FlagsMonotone) {
    // easy instance so that every flag turns on within double range
    const auto inst = validate_instance(1, 2, {0.2}, {{0.95, 0.05}});
    bool w = false, t = false, budget = false, cor = false;
    for (double lt = 1.0; lt < 700; lt += 0.5) {
        const auto r = ths_upper_terms(inst, std::exp(lt));
        const bool c = ths_order(inst, std::exp(lt)).valid;
        EXPECT_TRUE(!w || r.w_condition) << lt;
        EXPECT_TRUE(!t || r.t_condition) << lt;
        EXPECT_TRUE(!budget || r.budget_condition) << lt;
        EXPECT_TRUE(!cor || c) << lt;
        w = r.w_condition;
        t = r.t_condition;
        budget = r.budget_condition;
        cor = c;
    }
    EXPECT_TRUE(w && t && budget && cor);
}

TEST(ExploreCount, Examples) {
    EXPECT_NEAR(explore_count_bound(990, 1000, 5, 1000), 35.9156476, 1e-6);
    EXPECT_NEAR(explore_count_bound(100, 1000, 5, 1000), 5798.833988, 1e-5);
    EXPECT_NEAR(explore_count_bound(500, 500 + 1e-9, 5, 1000), 5 * std::log(1000.0), 1e-9);
    EXPECT_NEAR(explore_mean_bound(1e3, 1e4, 5), 2258.493237, 1e-5);
    EXPECT_THROW(explore_count_bound(10, 5, 5, 100), std::invalid_argument);
    EXPECT_THROW(explore_count_bound(10, 500, 5, 100), std::invalid_argument);
}

TEST(Overlays, NamesAndValidity) {
    const std::vector<Slot> times{1, 2, 3, 10, 1000};
    const auto curves = bound_overlays(k5(), times);
    std::vector<std::string> names;
    for (const auto& c : curves) {
        names.push_back(c.name);
        EXPECT_EQ(c.t.size(), c.value.size());
        EXPECT_EQ(c.t.size(), c.valid.size());
    }
    EXPECT_EQ(names, (std::vector<std::string>{"late_stage_lb", "early_stage_lb", "ths_upper", "ths_order",
                                               "early_heuristic_ub"}));
    const auto& early = curves[1];
    EXPECT_EQ(early.t.front(), 3.0);
    EXPECT_TRUE(early.valid.front());
    EXPECT_FALSE(early.valid.back());
    EXPECT_NEAR(*early.valid_to, 3.64631828, 1e-8);

    const auto multi = bound_overlays(
        validate_instance(2, 3, {0.3, 0.4}, {{0.6, 0.3, 0.2}, {0.1, 0.6, 0.3}}), times);
    EXPECT_EQ(multi.front().name, "late_stage_lb_avg");
    EXPECT_EQ(multi.back().name, "early_heuristic_ub");
}

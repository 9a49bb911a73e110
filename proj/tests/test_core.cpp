#include <gtest/gtest.h>

#include <cmath>

#include "qbandit/core.hpp"

using namespace qbandit;

namespace {

InstanceErrc error_of(std::size_t U, std::size_t K, std::vector<double> lam, std::vector<std::vector<double>> mu) {
    try {
        validate_instance(U, K, std::move(lam), std::move(mu));
    } catch (const InstanceError& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected InstanceError";
    return InstanceErrc::DimensionMismatch;
}

} // namespace

TEST(Instance, K5Derived) {
    const auto inst = validate_instance(1, 5, {0.55}, {{0.65, 0.48, 0.40, 0.30, 0.20}});
    const auto& d = inst.derived();
    EXPECT_EQ(d.k_star[0], 0u); // server 1, 0-based
    EXPECT_NEAR(d.eps[0], 0.1, 1e-12);
    EXPECT_NEAR(d.delta, 0.17, 1e-12);
    EXPECT_DOUBLE_EQ(d.mu_min, 0.20);
    EXPECT_DOUBLE_EQ(d.mu_max, 0.65);
    EXPECT_DOUBLE_EQ(d.lambda_min, 0.55);
    EXPECT_NEAR(d.eps_bar, 0.1, 1e-12);
    EXPECT_NEAR(inst.gap(0, 1), 0.17, 1e-12);
    EXPECT_DOUBLE_EQ(inst.gap(0, 0), 0.0);
}

TEST(Instance, OptimaNotMatching) {
    EXPECT_EQ(error_of(2, 2, {0.1, 0.1}, {{0.6, 0.3}, {0.7, 0.2}}), InstanceErrc::OptimaNotMatching);
}

TEST(Instance, Unstable) {
    try {
        validate_instance(1, 2, {0.7}, {{0.6, 0.5}});
        FAIL();
    } catch (const InstanceError& e) {
        EXPECT_EQ(e.code(), InstanceErrc::Unstable);
        EXPECT_EQ(e.queue(), 0u);
    }
    EXPECT_EQ(error_of(1, 2, {0.6}, {{0.6, 0.5}}), InstanceErrc::Unstable); // eps = 0
}

TEST(Instance, TiesAndRanges) {
    EXPECT_EQ(error_of(1, 3, {0.1}, {{0.5, 0.5, 0.2}}), InstanceErrc::NonUniqueOptimum);
    EXPECT_EQ(error_of(1, 2, {0.1}, {{1.0, 0.5}}), InstanceErrc::RateOutOfRange);
    EXPECT_EQ(error_of(1, 2, {0.0}, {{0.6, 0.5}}), InstanceErrc::RateOutOfRange);
    EXPECT_EQ(error_of(1, 2, {0.1}, {{NAN, 0.5}}), InstanceErrc::RateOutOfRange);
    EXPECT_EQ(error_of(3, 2, {0.1, 0.1, 0.1}, {{0.6, 0.5}, {0.5, 0.6}, {0.5, 0.6}}), InstanceErrc::DimensionMismatch);
    EXPECT_EQ(error_of(1, 2, {0.1}, {{0.6}}), InstanceErrc::DimensionMismatch);
    try {
        validate_instance(1, 2, {0.1}, {{0.6, 1.5}});
        FAIL();
    } catch (const InstanceError& e) {
        EXPECT_EQ(e.queue(), 0u);
        EXPECT_EQ(e.server(), 1u);
    }
}

TEST(Instance, ValidationIsTotal) {
    // Every input in a coarse grid yields either an instance or exactly one error.
    const std::vector<double> grid{0.0, 0.2, 0.5, 0.7, 1.0};
    int ok = 0, errors = 0;
    for (double l : grid)
        for (double a : grid)
            for (double b : grid) {
                try {
                    const auto inst = validate_instance(1, 2, {l}, {{a, b}});
                    EXPECT_GT(inst.eps(0), 0.0);
                    ++ok;
                } catch (const InstanceError&) {
                    ++errors;
                }
            }
    EXPECT_EQ(ok + errors, 125);
    EXPECT_GT(ok, 0);
}

TEST(Instance, MultiQueue) {
    const auto inst = validate_instance(2, 3, {0.3, 0.2}, {{0.6, 0.3, 0.1}, {0.2, 0.5, 0.4}});
    EXPECT_EQ(inst.k_star(0), 0u);
    EXPECT_EQ(inst.k_star(1), 1u);
    EXPECT_NEAR(inst.derived().eps_bar, (0.3 + 0.3) / 2, 1e-12);
    EXPECT_NEAR(inst.derived().delta, 0.1, 1e-12); // min gap over queues: 0.5 - 0.4
    EXPECT_DOUBLE_EQ(inst.derived().lambda_min, 0.2);
}

TEST(Lindley, Examples) {
    static_assert(lindley_step(3, true, true) == 3);
    EXPECT_EQ(lindley_step(3, true, true), 3);
    EXPECT_EQ(lindley_step(0, false, true), 0);
    EXPECT_EQ(lindley_step(0, true, true), 0);
    EXPECT_EQ(lindley_step(0, true, false), 1);
    EXPECT_EQ(lindley_step(5, false, true), 4);
}

TEST(InstanceJson, RoundTrip) {
    const auto inst = validate_instance(2, 3, {0.3, 0.2}, {{0.6, 0.3, 0.1}, {0.2, 0.5, 0.4}});
    const auto back = instance_from_json(instance_to_json(inst));
    EXPECT_EQ(back.lambdas(), inst.lambdas());
    EXPECT_EQ(back.mu_row(1), inst.mu_row(1));
}

TEST(InstanceJson, Errors) {
    EXPECT_THROW(instance_from_json(nlohmann::json{{"U", 1}, {"K", 2}, {"lambda", {0.1}}}), InstanceError);
    EXPECT_THROW(instance_from_json(nlohmann::json::parse(R"({"U":1,"K":2,"lambda":[0.1],"mu":[[0.6,0.5]],"x":1})")),
                 InstanceError);
    EXPECT_THROW(instance_from_json(nlohmann::json::parse(R"({"U":1,"K":2,"lambda":"a","mu":[[0.6,0.5]]})")),
                 InstanceError);
}

#include <gtest/gtest.h>

#include <cmath>

#include "qbandit/analysis.hpp"

using namespace qbandit;

TEST(Smooth, ConstantAndWindow) {
    const std::vector<Slot> t{1, 2, 3, 10, 100};
    const std::vector<double> v{4, 4, 4, 4, 4};
    for (double x : smooth_log_window(t, v)) EXPECT_DOUBLE_EQ(x, 4.0);
    // log10 spacing: 1 and 1.2589 are within 0.1 decade, 10 is alone
    const std::vector<Slot> t2{100, 125, 1000};
    const auto s = smooth_log_window(t2, {1.0, 3.0, 10.0});
    EXPECT_DOUBLE_EQ(s[0], 2.0);
    EXPECT_DOUBLE_EQ(s[1], 2.0);
    EXPECT_DOUBLE_EQ(s[2], 10.0);
    EXPECT_THROW(smooth_log_window(t2, {1.0}), std::invalid_argument);
}

TEST(Peak, FirstMaximum) {
    const auto p = find_peak({1, 2, 3, 4}, {1.0, 5.0, 5.0, 2.0});
    EXPECT_EQ(p.t, 2);
    EXPECT_EQ(p.index, 1u);
    EXPECT_THROW(find_peak({}, {}), std::invalid_argument);
}

TEST(Slope, PowerLaw) {
    std::vector<Slot> t;
    std::vector<double> v;
    for (Slot x = 10; x <= 100000; x *= 2) {
        t.push_back(x);
        v.push_back(3.0 * std::pow(static_cast<double>(x), -1.0));
    }
    EXPECT_NEAR(loglog_slope(t, v, 10, 1e5), -1.0, 1e-12);
    EXPECT_NEAR(loglog_slope(t, v, 1000, 1e5), -1.0, 1e-12);
    EXPECT_TRUE(std::isnan(loglog_slope(t, v, 1e6, 1e7)));
    v[3] = -1.0; // non-positive points are skipped
    EXPECT_NEAR(loglog_slope(t, v, 10, 1e5), -1.0, 1e-12);
}

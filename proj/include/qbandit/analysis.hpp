#pragma once
// Curve summaries used on regret series: log-window smoothing, peak location
// and log-log slope.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qbandit/core.hpp"

namespace qbandit {

/// Centered moving average over points whose log10(t) lies within
/// half_width_decades of the centre point.
inline std::vector<double> smooth_log_window(const std::vector<Slot>& times, const std::vector<double>& values,
                                             double half_width_decades = 0.1) {
    if (times.size() != values.size()) throw std::invalid_argument("smooth_log_window: size mismatch");
    const std::size_t n = times.size();
    std::vector<double> lt(n), out(n);
    for (std::size_t i = 0; i < n; ++i) lt[i] = std::log10(static_cast<double>(times[i]));
    // two-pointer window over the sorted grid
    std::size_t lo = 0, hi = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        while (hi < n && lt[hi] <= lt[i] + half_width_decades) sum += values[hi++];
        while (lt[lo] < lt[i] - half_width_decades) sum -= values[lo++];
        out[i] = sum / static_cast<double>(hi - lo);
    }
    return out;
}

struct Peak {
    std::size_t index = 0;
    Slot t = 0;
    double value = 0.0;
};

inline Peak find_peak(const std::vector<Slot>& times, const std::vector<double>& values) {
    if (times.empty()) throw std::invalid_argument("find_peak: empty series");
    Peak p{0, times[0], values[0]};
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > p.value) p = {i, times[i], values[i]};
    return p;
}

/// Least-squares slope of ln(value) on ln(t) over points in [t_lo, t_hi] with
/// value > 0. NaN when fewer than two points qualify.
inline double loglog_slope(const std::vector<Slot>& times, const std::vector<double>& values, double t_lo,
                           double t_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = static_cast<double>(times[i]);
        if (t < t_lo || t > t_hi || !(values[i] > 0.0)) continue;
        const double x = std::log(t), y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::nan("");
    const double nd = static_cast<double>(n);
    return (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
}

} // namespace qbandit

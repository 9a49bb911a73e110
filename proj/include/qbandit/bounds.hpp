#pragma once
// Closed-form regret bounds. Constants the theory leaves unspecified are set
// to 1, so every curve is only meaningful up to a multiplicative constant.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbandit/core.hpp"

namespace qbandit {

class DivergentKL : public std::domain_error {
public:
    DivergentKL() : std::domain_error("DivergentKL: q on the boundary with p != q") {}
};

class WindowEmpty : public std::domain_error {
public:
    explicit WindowEmpty(double right)
        : std::domain_error("WindowEmpty: right endpoint " + std::to_string(right) + " < 3"), right_(right) {}
    double right() const noexcept { return right_; }

private:
    double right_;
};

/// KL(Ber(p) || Ber(q)) in nats, with 0 ln 0 = 0.
inline double bernoulli_kl(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("bernoulli_kl: arguments must be probabilities");
    if (p == q) return 0.0;
    if (q == 0.0 || q == 1.0) throw DivergentKL();
    double kl = 0.0;
    if (p > 0.0) kl += p * std::log(p / q);
    if (p < 1.0) kl += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return std::max(kl, 0.0);
}

/// D(mu) = Delta / KL(mu_min, (mu_max + 1) / 2).
inline double d_mu(const ProblemInstance& inst) {
    const auto& d = inst.derived();
    return d.delta / bernoulli_kl(d.mu_min, (d.mu_max + 1.0) / 2.0);
}

// Which form of the multi-queue lower bounds to evaluate. SingleQueue is the
// U = 1 statement (lambda/4 factor); Averaged bounds the queue-average regret;
// PerQueue bounds one queue's regret.
enum class BoundForm { SingleQueue, Averaged, PerQueue };

inline double late_stage_lb(const ProblemInstance& inst, double alpha, double t,
                            BoundForm form = BoundForm::SingleQueue) {
    if (t < 1.0) throw std::invalid_argument("late_stage_lb: t must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("late_stage_lb: alpha must be in (0,1)");
    const auto U = static_cast<double>(inst.queues()), K = static_cast<double>(inst.servers());
    const double lam = inst.derived().lambda_min;
    const double D = d_mu(inst);
    switch (form) {
    case BoundForm::SingleQueue: return lam / 4.0 * D * (1.0 - alpha) * (K - 1.0) / t;
    case BoundForm::Averaged: return lam / 8.0 * D * (1.0 - alpha) * (K - 1.0) / t;
    case BoundForm::PerQueue: return lam / 8.0 * D * (1.0 - alpha) * std::max(U - 1.0, 2.0 * (K - U)) / t;
    }
    return 0.0;
}

// [left, right]; the left end is max{C1 K^gamma, tau} with unspecified constants.
struct EarlyStageWindow {
    double right = 0.0;
    std::string left = "max{C1*K^gamma, tau}";
};

struct EarlyStageBound {
    double value = 0.0;
    EarlyStageWindow window;
    bool in_window = false; // t <= right
};

/// Early-stage lower bound c(K) D(mu) ln t / ln ln t on its window.
/// queue selects eps_u for the PerQueue form.
inline EarlyStageBound early_stage_lb(const ProblemInstance& inst, double alpha, double gamma, double t,
                                      BoundForm form = BoundForm::SingleQueue, std::size_t queue = 0) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("early_stage_lb: alpha must be in (0,1)");
    if (!(gamma > 1.0 / (1.0 - alpha))) throw std::invalid_argument("early_stage_lb: need gamma > 1/(1-alpha)");
    if (t < 3.0) throw std::invalid_argument("early_stage_lb: need t >= 3 so that ln ln t > 0");
    const auto U = static_cast<double>(inst.queues()), K = static_cast<double>(inst.servers());
    const double D = d_mu(inst);
    const double shape = std::log(t) / std::log(std::log(t));
    EarlyStageBound b;
    switch (form) {
    case BoundForm::SingleQueue:
        b.value = D / 2.0 * (K - 1.0) * shape;
        b.window.right = (K - 1.0) * D / (2.0 * inst.eps(queue));
        break;
    case BoundForm::Averaged:
        b.value = D / 4.0 * (K - 1.0) * shape;
        b.window.right = (K - 1.0) * D / (4.0 * inst.derived().eps_bar);
        break;
    case BoundForm::PerQueue:
        b.value = D / 4.0 * std::max(U - 1.0, 2.0 * (K - U)) * shape;
        b.window.right = (K - 1.0) * D / (2.0 * inst.eps(queue));
        break;
    }
    if (b.window.right < 3.0) throw WindowEmpty(b.window.right);
    b.in_window = t <= b.window.right;
    return b;
}

struct ThsUpperTerms {
    double w = 0.0;
    double v_prime = 0.0;
    double v = 0.0;
    double bound = 0.0;
    // ln w(t) and the ln of the t >= exp(6/Delta^2) threshold, for reporting
    // when w itself overflows.
    double log_w = 0.0;
    double log_t_threshold = 0.0;
    bool w_condition = false;     // w(t) / ln t >= 2 / eps
    bool t_condition = false;     // t >= exp(6 / Delta^2)
    bool budget_condition = false; // v + v' <= t / 2
    bool valid() const { return w_condition && t_condition && budget_condition; }
};

/// Q-ThS late-stage upper-bound ingredients for queue `queue`.
inline ThsUpperTerms ths_upper_terms(const ProblemInstance& inst, double t, std::size_t queue = 0) {
    if (t < 2.0) throw std::invalid_argument("ths_upper_terms: t must be >= 2");
    const double K = static_cast<double>(inst.servers());
    const double eps = inst.eps(queue), delta = inst.derived().delta;
    const double lt = std::log(t);
    ThsUpperTerms r;
    r.log_w = std::pow(2.0 * lt / delta, 2.0 / 3.0);
    r.w = std::exp(r.log_w);
    r.v_prime = 6.0 * K / eps * r.w;
    r.v = 24.0 / (eps * eps) * lt + 60.0 * K / eps * r.v_prime * lt * lt / t;
    r.bound = K * r.v * lt * lt / t;
    r.log_t_threshold = 6.0 / (delta * delta);
    // compare in logs: w may be inf
    r.w_condition = r.log_w - std::log(lt) >= std::log(2.0 / eps);
    r.t_condition = lt >= r.log_t_threshold;
    r.budget_condition = r.v + r.v_prime <= t / 2.0;
    return r;
}

struct ThsOrderTerms {
    double bound = 0.0; // K ln^3 t / (eps^2 t)
    bool valid = false;
};

/// Simplified late-stage order K ln^3 t / (eps^2 t) with its validity window.
inline ThsOrderTerms ths_order(const ProblemInstance& inst, double t, std::size_t queue = 0) {
    if (t < 2.0) throw std::invalid_argument("ths_order: t must be >= 2");
    const double K = static_cast<double>(inst.servers());
    const double eps = inst.eps(queue), delta = inst.derived().delta;
    const double lt = std::log(t);
    const double log_w = std::pow(2.0 * lt / delta, 2.0 / 3.0);
    ThsOrderTerms c;
    c.bound = K * lt * lt * lt / (eps * eps * t);
    const bool w_ok = log_w - std::log(lt) >= std::log(2.0 / eps);
    const bool ratio_ok = lt - log_w >= std::log(std::max(24.0 * K / eps, 15.0 * K * K * lt));
    const bool t_ok = lt >= 6.0 / (delta * delta);
    const bool tail_ok = t / lt >= 198.0 / (eps * eps);
    c.valid = w_ok && ratio_ok && t_ok && tail_ok;
    return c;
}

/// Exploration-count threshold 5 max(ln t, K (ln^3 t2 - ln^3 t1)).
inline double explore_count_bound(double t1, double t2, std::size_t K, double t) {
    if (!(t1 >= 1.0 && t1 < t2 && t2 <= t)) throw std::invalid_argument("explore_count_bound: need 1 <= t1 < t2 <= t");
    const double a = std::log(t1), b = std::log(t2);
    return 5.0 * std::max(std::log(t), static_cast<double>(K) * (b * b * b - a * a * a));
}

/// Mean exploration count over (t1, t2] is at most K (ln^3 t2 - ln^3 t1).
inline double explore_mean_bound(double t1, double t2, std::size_t K) {
    const double a = std::log(t1), b = std::log(t2);
    return static_cast<double>(K) * (b * b * b - a * a * a);
}

struct BoundCurve {
    std::string name;
    double valid_from = 1.0;
    std::optional<double> valid_to;
    std::string caveat;
    std::vector<double> t;
    std::vector<double> value;
    std::vector<bool> valid;
};

struct OverlayOptions {
    double alpha = 0.5;
    double gamma = 3.0;
};

/// Bound curves on the given slots. Single-queue forms for U = 1; averaged
/// and per-queue forms otherwise.
inline std::vector<BoundCurve> bound_overlays(const ProblemInstance& inst, const std::vector<Slot>& times,
                                              const OverlayOptions& opt = {}) {
    const std::size_t U = inst.queues();
    const double K = static_cast<double>(inst.servers());
    const std::string up_to = "up to unspecified constant";
    std::vector<BoundCurve> out;

    auto add_late = [&](const std::string& name, BoundForm form) {
        BoundCurve c{name, 1.0, std::nullopt, up_to + "; holds for infinitely many t", {}, {}, {}};
        for (auto s : times) {
            c.t.push_back(static_cast<double>(s));
            c.value.push_back(late_stage_lb(inst, opt.alpha, static_cast<double>(s), form));
            c.valid.push_back(true);
        }
        out.push_back(std::move(c));
    };
    auto add_early = [&](const std::string& name, BoundForm form, std::size_t u) {
        BoundCurve c{name, 3.0, std::nullopt, up_to + "; left end max{C1*K^gamma, tau} unknown", {}, {}, {}};
        for (auto s : times) {
            if (s < 3) continue;
            try {
                const auto b = early_stage_lb(inst, opt.alpha, opt.gamma, static_cast<double>(s), form, u);
                c.valid_to = b.window.right;
                c.t.push_back(static_cast<double>(s));
                c.value.push_back(b.value);
                c.valid.push_back(b.in_window);
            } catch (const WindowEmpty& e) {
                c.valid_to = e.right();
                c.caveat += "; window empty";
                break;
            }
        }
        out.push_back(std::move(c));
    };

    if (U == 1) {
        add_late("late_stage_lb", BoundForm::SingleQueue);
        add_early("early_stage_lb", BoundForm::SingleQueue, 0);
    } else {
        add_late("late_stage_lb_avg", BoundForm::Averaged);
        add_late("late_stage_lb_per_queue", BoundForm::PerQueue);
        add_early("early_stage_lb_avg", BoundForm::Averaged, 0);
        for (std::size_t u = 0; u < U; ++u)
            add_early("early_stage_lb_q" + std::to_string(u + 1), BoundForm::PerQueue, u);
    }
    for (std::size_t u = 0; u < U; ++u) {
        const std::string suffix = U == 1 ? "" : "_q" + std::to_string(u + 1);
        BoundCurve upper{"ths_upper" + suffix, 2.0, std::nullopt, up_to, {}, {}, {}};
        BoundCurve cor{"ths_order" + suffix, 2.0, std::nullopt, up_to, {}, {}, {}};
        for (auto s : times) {
            if (s < 2) continue;
            const double td = static_cast<double>(s);
            const auto terms = ths_upper_terms(inst, td, u);
            upper.t.push_back(td);
            upper.value.push_back(terms.bound);
            upper.valid.push_back(terms.valid());
            const auto c = ths_order(inst, td, u);
            cor.t.push_back(td);
            cor.value.push_back(c.bound);
            cor.valid.push_back(c.valid);
        }
        out.push_back(std::move(upper));
        out.push_back(std::move(cor));
    }
    BoundCurve heuristic{"early_heuristic_ub", 1.0, std::nullopt, "heuristic 2K ln^3 t; constants unknown", {}, {}, {}};
    for (auto s : times) {
        const double lt = std::log(static_cast<double>(s));
        heuristic.t.push_back(static_cast<double>(s));
        heuristic.value.push_back(2.0 * K * lt * lt * lt);
        heuristic.valid.push_back(false);
    }
    out.push_back(std::move(heuristic));
    return out;
}

} // namespace qbandit

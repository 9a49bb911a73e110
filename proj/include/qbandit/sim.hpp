#pragma once
// Coupled Monte Carlo engine: a bandit-scheduled system and a genie system
// driven by the same arrivals, the same service randomness and the same
// initial queue draw.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qbandit/core.hpp"
#include "qbandit/policies.hpp"
#include "qbandit/random.hpp"

namespace qbandit {

// CommonUniform: one uniform V_u(t) per queue and slot, R_uk = 1{V_u <= mu_uk}.
// IndependentServices: one uniform per link.
enum class CouplingMode { CommonUniform, IndependentServices };

// RecursionStationary: invariant law of the same-slot-service recursion,
//   P[Q = j] = (1 - rho) rho^j.
// PreService: the post-arrival, pre-service law returned by
//   sample_stationary_queue(), used as is.
enum class InitialLaw { RecursionStationary, PreService };

struct SimConfig {
    ProblemInstance instance;
    PolicyKind policy;
    Slot horizon = 1000;
    std::int64_t episodes = 100;
    CouplingMode coupling = CouplingMode::CommonUniform;
    std::uint64_t master_seed = 1;
    // 0 selects the geometric grid with points_per_decade points per decade.
    Slot record_every = 0;
    int points_per_decade = 200;
    // Slots at which mean T_uk tables are aggregated. Empty: powers of ten and the horizon.
    std::vector<Slot> table_checkpoints;
    InitialLaw initial_law = InitialLaw::RecursionStationary;
    bool shared_initial = true;
    // 0: QBANDIT_WORKERS, then hardware concurrency.
    unsigned workers = 0;
};

inline void check_config(const SimConfig& cfg) {
    if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (cfg.episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (cfg.record_every < 0) throw std::invalid_argument("record_every must be >= 0");
    if (cfg.record_every == 0 && cfg.points_per_decade < 1) throw std::invalid_argument("points_per_decade must be >= 1");
    for (auto c : cfg.table_checkpoints)
        if (c < 1 || c > cfg.horizon) throw std::invalid_argument("table checkpoint outside [1, horizon]");
    check_policy(cfg.policy);
}

inline unsigned resolve_workers(unsigned requested, std::int64_t episodes) {
    unsigned n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("QBANDIT_WORKERS"); env && *env) {
            const long v = std::strtol(env, nullptr, 10);
            if (v > 0) n = static_cast<unsigned>(v);
        }
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::int64_t>(n, std::max<std::int64_t>(episodes, 1)));
}

/// Draw from P[Q = 0] = 1 - lambda/mu*, P[Q = j] = (lambda/mu*)(1 - rho) rho^(j-1),
/// rho = lambda (1 - mu*) / ((1 - lambda) mu*).
inline Length sample_stationary_queue(double lambda, double mu_star, RandomStream& rng) {
    if (!(lambda > 0.0 && lambda < mu_star && mu_star < 1.0))
        throw InstanceError(InstanceErrc::Unstable, kNoIndex, kNoIndex, "need 0 < lambda < mu* < 1");
    if (rng.uniform() >= lambda / mu_star) return 0;
    const double rho = lambda * (1.0 - mu_star) / ((1.0 - lambda) * mu_star);
    return 1 + std::geometric_distribution<Length>(1.0 - rho)(rng);
}

/// pmf of sample_stationary_queue at j.
inline double stationary_pmf(double lambda, double mu_star, Length j) {
    const double rho = lambda * (1.0 - mu_star) / ((1.0 - lambda) * mu_star);
    if (j == 0) return 1.0 - lambda / mu_star;
    return lambda / mu_star * (1.0 - rho) * std::pow(rho, static_cast<double>(j - 1));
}

/// Initial queue under the chosen law. The recursion-stationary draw takes the
/// post-arrival content X from sample_stationary_queue() and applies one
/// service opportunity of the optimal server: (X - S)^+.
inline Length sample_initial_queue(InitialLaw law, double lambda, double mu_star, RandomStream& rng) {
    const Length x = sample_stationary_queue(lambda, mu_star, rng);
    if (law == InitialLaw::PreService) return x;
    return lindley_step(x, false, rng.bernoulli(mu_star));
}

/// Mean of the initial law.
inline double initial_mean(InitialLaw law, double lambda, double mu_star) {
    const double rho = lambda * (1.0 - mu_star) / ((1.0 - lambda) * mu_star);
    return law == InitialLaw::PreService ? (lambda / mu_star) / (1.0 - rho) : rho / (1.0 - rho);
}

/// Advance both systems by one slot from given draws. service_uniforms holds U
/// values (CommonUniform) or U*K values (IndependentServices, row-major). The
/// bandit's realized services are written to services.
inline void apply_slot(const ProblemInstance& inst, CouplingMode mode, const Matching& schedule, const Flags& arrivals,
                       const std::vector<double>& service_uniforms, std::vector<Length>& bandit_q,
                       std::vector<Length>& genie_q, Flags& services) {
    const std::size_t U = inst.queues(), K = inst.servers();
    services.resize(U);
    for (std::size_t u = 0; u < U; ++u) {
        const std::size_t kb = schedule.assign[u], kg = inst.k_star(u);
        const double vb = mode == CouplingMode::CommonUniform ? service_uniforms[u] : service_uniforms[u * K + kb];
        const double vg = mode == CouplingMode::CommonUniform ? service_uniforms[u] : service_uniforms[u * K + kg];
        const bool sb = vb <= inst.mu(u, kb);
        const bool sg = vg <= inst.mu(u, kg);
        services[u] = sb ? 1 : 0;
        bandit_q[u] = lindley_step(bandit_q[u], arrivals[u] != 0, sb);
        genie_q[u] = lindley_step(genie_q[u], arrivals[u] != 0, sg);
    }
}

// One episode of the coupled systems, stepped slot by slot.
class CoupledEpisode {
public:
    CoupledEpisode(const SimConfig& cfg, std::uint64_t episode_index)
        : inst_(&cfg.instance), policy_(cfg.policy), coupling_(cfg.coupling),
          init_rng_(cfg.master_seed, episode_index, StreamTag::Initial),
          arrival_rng_(cfg.master_seed, episode_index, StreamTag::Arrivals),
          service_rng_(cfg.master_seed, episode_index, StreamTag::Services),
          policy_rng_(cfg.master_seed, episode_index, StreamTag::Policy),
          stats_(inst_->queues(), inst_->servers()) {
        const std::size_t U = inst_->queues();
        record_.bandit_q.resize(U);
        record_.genie_q.resize(U);
        record_.arrivals.resize(U);
        record_.services.resize(U);
        for (std::size_t u = 0; u < U; ++u) {
            const double lam = inst_->lambda(u), ms = inst_->mu_star(u);
            const Length q = sample_initial_queue(cfg.initial_law, lam, ms, init_rng_);
            record_.bandit_q[u] = q;
            record_.genie_q[u] = cfg.shared_initial ? q : sample_initial_queue(cfg.initial_law, lam, ms, init_rng_);
        }
        initial_bandit_ = record_.bandit_q;
        initial_genie_ = record_.genie_q;
        uniforms_.resize(coupling_ == CouplingMode::CommonUniform ? U : U * inst_->servers());
    }

    const TraceRecord& step() {
        const std::size_t U = inst_->queues();
        const Slot t = record_.t + 1;
        for (std::size_t u = 0; u < U; ++u) record_.arrivals[u] = arrival_rng_.bernoulli(inst_->lambda(u)) ? 1 : 0;
        Decision d = policy_decide(policy_, stats_, *inst_, t, policy_rng_);
        for (auto& v : uniforms_) v = service_rng_.uniform();
        apply_slot(*inst_, coupling_, d.schedule, record_.arrivals, uniforms_, record_.bandit_q, record_.genie_q,
                   record_.services);
        stats_ = policy_update(std::move(stats_), d.schedule, record_.services);
        record_.t = t;
        record_.schedule = std::move(d.schedule.assign);
        record_.explored = d.explored;
        return record_;
    }

    Slot t() const noexcept { return record_.t; }
    const TraceRecord& current() const noexcept { return record_; }
    const CountStats& stats() const noexcept { return stats_; }
    const std::vector<Length>& initial_bandit() const noexcept { return initial_bandit_; }
    const std::vector<Length>& initial_genie() const noexcept { return initial_genie_; }

private:
    const ProblemInstance* inst_;
    PolicyKind policy_;
    CouplingMode coupling_;
    RandomStream init_rng_, arrival_rng_, service_rng_, policy_rng_;
    CountStats stats_;
    TraceRecord record_;
    std::vector<Length> initial_bandit_, initial_genie_;
    std::vector<double> uniforms_;
};

struct EpisodeTrace {
    std::vector<Length> initial_bandit;
    std::vector<Length> initial_genie;
    std::vector<TraceRecord> records; // records[t - 1] is slot t
};

inline EpisodeTrace run_episode(const SimConfig& cfg, std::uint64_t episode_index) {
    check_config(cfg);
    CoupledEpisode ep(cfg, episode_index);
    EpisodeTrace trace{ep.initial_bandit(), ep.initial_genie(), {}};
    trace.records.reserve(static_cast<std::size_t>(cfg.horizon));
    for (Slot t = 1; t <= cfg.horizon; ++t) trace.records.push_back(ep.step());
    return trace;
}

/// Runs fn(worker, episode) for every episode on `workers` threads. Episodes
/// are handed out by an atomic counter; callers keep per-worker state.
template <class Fn>
void for_each_episode(std::int64_t episodes, unsigned workers, Fn&& fn) {
    if (workers <= 1) {
        for (std::int64_t e = 0; e < episodes; ++e) fn(0u, e);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::int64_t e = next++; e < episodes; e = next++) fn(w, e);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = episodes;
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Recording slots: every record_every-th slot, or a log-spaced grid
/// (all slots while the spacing is below one), always including the horizon
/// and the table checkpoints.
inline std::vector<Slot> recording_times(const SimConfig& cfg) {
    std::vector<Slot> times;
    if (cfg.record_every > 0) {
        for (Slot t = cfg.record_every; t <= cfg.horizon; t += cfg.record_every) times.push_back(t);
    } else {
        const double step = 1.0 / cfg.points_per_decade;
        for (int i = 0;; ++i) {
            const auto t = static_cast<Slot>(std::llround(std::pow(10.0, i * step)));
            if (t > cfg.horizon) break;
            times.push_back(t);
        }
    }
    times.push_back(cfg.horizon);
    for (auto c : cfg.table_checkpoints) times.push_back(c);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

inline std::vector<Slot> default_table_checkpoints(Slot horizon) {
    std::vector<Slot> out;
    for (Slot t = 10; t < horizon; t *= 10) out.push_back(t);
    out.push_back(horizon);
    return out;
}

inline constexpr double kNormalQuantile975 = 1.959963984540054;

struct RegretSeries {
    std::size_t queues = 0;
    std::size_t servers = 0;
    std::int64_t episodes = 0;
    std::vector<Slot> times;
    // [time * queues + u]
    std::vector<double> psi;
    std::vector<double> half_width;
    std::vector<double> regen_age;
    std::vector<double> genie_mean;
    std::vector<double> genie_half_width;
    // [time]
    std::vector<double> explore_frac;
    // Checkpoint tables. mean_T: [(c * queues + u) * servers + k];
    // mean_TT: [((c * queues + u) * servers + k) * servers + k'].
    std::vector<Slot> table_times;
    std::vector<double> mean_T;
    std::vector<double> mean_TT;

    std::size_t time_index(Slot t) const {
        const auto it = std::lower_bound(times.begin(), times.end(), t);
        if (it == times.end() || *it != t) throw std::out_of_range("slot " + std::to_string(t) + " not recorded");
        return static_cast<std::size_t>(it - times.begin());
    }
    std::size_t table_index(Slot t) const {
        const auto it = std::lower_bound(table_times.begin(), table_times.end(), t);
        if (it == table_times.end() || *it != t)
            throw std::out_of_range("slot " + std::to_string(t) + " has no checkpoint table");
        return static_cast<std::size_t>(it - table_times.begin());
    }
    double psi_at(Slot t, std::size_t u) const { return psi[time_index(t) * queues + u]; }
    double half_width_at(Slot t, std::size_t u) const { return half_width[time_index(t) * queues + u]; }
    double mean_trials(Slot t, std::size_t u, std::size_t k) const {
        return mean_T[(table_index(t) * queues + u) * servers + k];
    }
};

namespace detail {

// Exact integer moments; merging in any order gives the same totals.
struct RegretAccumulator {
    std::vector<std::int64_t> diff, diff2, regen, genie, genie2, explored, T, TT;

    RegretAccumulator(std::size_t n_times, std::size_t n_tables, std::size_t U, std::size_t K)
        : diff(n_times * U), diff2(n_times * U), regen(n_times * U), genie(n_times * U), genie2(n_times * U),
          explored(n_times), T(n_tables * U * K), TT(n_tables * U * K * K) {}

    void merge(const RegretAccumulator& o) {
        auto add = [](auto& a, const auto& b) {
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        };
        add(diff, o.diff);
        add(diff2, o.diff2);
        add(regen, o.regen);
        add(genie, o.genie);
        add(genie2, o.genie2);
        add(explored, o.explored);
        add(T, o.T);
        add(TT, o.TT);
    }
};

inline void mean_and_half_width(std::int64_t sum, std::int64_t sum2, std::int64_t n, double& mean, double& hw) {
    const double nd = static_cast<double>(n);
    mean = static_cast<double>(sum) / nd;
    if (n < 2) {
        hw = 0.0;
        return;
    }
    // Variance from exact integer moments: (n*sum2 - sum^2) / (n (n - 1)).
    const long double num = static_cast<long double>(n) * static_cast<long double>(sum2) -
                            static_cast<long double>(sum) * static_cast<long double>(sum);
    const double var = std::max(0.0, static_cast<double>(num / (static_cast<long double>(n) * (n - 1))));
    hw = kNormalQuantile975 * std::sqrt(var / nd);
}

} // namespace detail

/// Monte Carlo estimate of psi_u(t) = E[Q_u(t) - Q*_u(t)] on the recording grid.
inline RegretSeries estimate_regret(const SimConfig& cfg) {
    check_config(cfg);
    SimConfig run = cfg;
    if (run.table_checkpoints.empty()) run.table_checkpoints = default_table_checkpoints(run.horizon);
    std::sort(run.table_checkpoints.begin(), run.table_checkpoints.end());
    run.table_checkpoints.erase(std::unique(run.table_checkpoints.begin(), run.table_checkpoints.end()),
                                run.table_checkpoints.end());

    const std::size_t U = run.instance.queues(), K = run.instance.servers();
    const auto times = recording_times(run);
    const auto& tables = run.table_checkpoints;
    const unsigned workers = resolve_workers(run.workers, run.episodes);
    std::vector<detail::RegretAccumulator> acc(workers, detail::RegretAccumulator(times.size(), tables.size(), U, K));

    for_each_episode(run.episodes, workers, [&](unsigned w, std::int64_t e) {
        auto& a = acc[w];
        CoupledEpisode ep(run, static_cast<std::uint64_t>(e));
        std::vector<Slot> last_zero(U, 0);
        std::size_t ti = 0, ci = 0;
        for (Slot t = 1; t <= run.horizon; ++t) {
            const TraceRecord& r = ep.step();
            for (std::size_t u = 0; u < U; ++u)
                if (r.bandit_q[u] == 0) last_zero[u] = t;
            if (ti < times.size() && times[ti] == t) {
                for (std::size_t u = 0; u < U; ++u) {
                    const std::int64_t d = r.bandit_q[u] - r.genie_q[u];
                    a.diff[ti * U + u] += d;
                    a.diff2[ti * U + u] += d * d;
                    a.regen[ti * U + u] += t - last_zero[u];
                    a.genie[ti * U + u] += r.genie_q[u];
                    a.genie2[ti * U + u] += r.genie_q[u] * r.genie_q[u];
                }
                a.explored[ti] += r.explored ? 1 : 0;
                ++ti;
            }
            if (ci < tables.size() && tables[ci] == t) {
                const auto& st = ep.stats();
                for (std::size_t u = 0; u < U; ++u)
                    for (std::size_t k = 0; k < K; ++k) {
                        const std::size_t base = (ci * U + u) * K + k;
                        a.T[base] += st.T(u, k);
                        for (std::size_t k2 = 0; k2 < K; ++k2) a.TT[base * K + k2] += st.T(u, k) * st.T(u, k2);
                    }
                ++ci;
            }
        }
    });
    for (unsigned w = 1; w < workers; ++w) acc[0].merge(acc[w]);
    const auto& total = acc[0];

    RegretSeries s;
    s.queues = U;
    s.servers = K;
    s.episodes = run.episodes;
    s.times = times;
    s.table_times = tables;
    const std::size_t n = times.size() * U;
    s.psi.resize(n);
    s.half_width.resize(n);
    s.regen_age.resize(n);
    s.genie_mean.resize(n);
    s.genie_half_width.resize(n);
    const double ne = static_cast<double>(run.episodes);
    for (std::size_t i = 0; i < n; ++i) {
        detail::mean_and_half_width(total.diff[i], total.diff2[i], run.episodes, s.psi[i], s.half_width[i]);
        detail::mean_and_half_width(total.genie[i], total.genie2[i], run.episodes, s.genie_mean[i],
                                    s.genie_half_width[i]);
        s.regen_age[i] = static_cast<double>(total.regen[i]) / ne;
    }
    s.explore_frac.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) s.explore_frac[i] = static_cast<double>(total.explored[i]) / ne;
    s.mean_T.resize(total.T.size());
    for (std::size_t i = 0; i < total.T.size(); ++i) s.mean_T[i] = static_cast<double>(total.T[i]) / ne;
    s.mean_TT.resize(total.TT.size());
    for (std::size_t i = 0; i < total.TT.size(); ++i) s.mean_TT[i] = static_cast<double>(total.TT[i]) / ne;
    return s;
}

/// Sample-path bound Q_u(t) - Q*_u(t) <= sum over the current regenerative
/// cycle of (E(l) + sum_{k != k*_u} I_uk(l)). The cycle starts at the last slot
/// s <= t with Q_u(s) = 0, or at slot 0 if the queue has not emptied.
inline bool regen_cycle_check(const EpisodeTrace& trace, const ProblemInstance& inst, std::size_t u, Slot t) {
    if (t < 1 || t > static_cast<Slot>(trace.records.size())) throw std::out_of_range("regen_cycle_check: bad slot");
    const auto& at = trace.records[static_cast<std::size_t>(t - 1)];
    const Length lhs = at.bandit_q[u] - at.genie_q[u];
    Length rhs = 0;
    for (Slot l = t; l >= 1; --l) {
        const auto& r = trace.records[static_cast<std::size_t>(l - 1)];
        if (l < t && r.bandit_q[u] == 0) break;
        if (l == t && r.bandit_q[u] == 0) return lhs <= 0;
        rhs += (r.explored || r.schedule[u] != inst.k_star(u)) ? 1 : 0;
    }
    return lhs <= rhs;
}

// Online form of regen_cycle_check: O(U) per slot.
class RegenCycleMonitor {
public:
    explicit RegenCycleMonitor(const ProblemInstance& inst)
        : inst_(&inst), cycle_count_(inst.queues(), 0) {}

    // Returns true when the bound holds for every queue at this slot.
    bool observe(const TraceRecord& r) {
        bool ok = true;
        for (std::size_t u = 0; u < inst_->queues(); ++u) {
            if (r.bandit_q[u] == 0) {
                cycle_count_[u] = 0;
                ok = ok && r.bandit_q[u] - r.genie_q[u] <= 0;
                continue;
            }
            cycle_count_[u] += (r.explored || r.schedule[u] != inst_->k_star(u)) ? 1 : 0;
            ok = ok && r.bandit_q[u] - r.genie_q[u] <= cycle_count_[u];
        }
        return ok;
    }

private:
    const ProblemInstance* inst_;
    std::vector<Length> cycle_count_;
};

struct SuboptimalBound {
    double lhs = 0.0;
    double lhs_half_width = 0.0;
    double rhs = 0.0;
    double rhs_half_width = 0.0;

    double combined_half_width() const { return std::hypot(lhs_half_width, rhs_half_width); }
    bool holds() const { return lhs >= rhs - 2.0 * combined_half_width(); }
};

/// Estimated psi_u(t) against sum_{k != k*} Delta_uk E[T_uk(t)] - eps_u t.
inline SuboptimalBound suboptimal_bound_check(const RegretSeries& s, const ProblemInstance& inst, Slot t,
                                              std::size_t u = 0) {
    SuboptimalBound b;
    b.lhs = s.psi_at(t, u);
    b.lhs_half_width = s.half_width_at(t, u);
    const std::size_t K = inst.servers();
    const std::size_t c = s.table_index(t);
    double mean = 0.0, second = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        mean += inst.gap(u, k) * s.mean_T[(c * s.queues + u) * K + k];
        for (std::size_t k2 = 0; k2 < K; ++k2)
            second += inst.gap(u, k) * inst.gap(u, k2) * s.mean_TT[((c * s.queues + u) * K + k) * K + k2];
    }
    b.rhs = mean - inst.eps(u) * static_cast<double>(t);
    const double n = static_cast<double>(s.episodes);
    const double var = n > 1 ? std::max(0.0, (second - mean * mean) * n / (n - 1)) : 0.0;
    b.rhs_half_width = kNormalQuantile975 * std::sqrt(var / n);
    return b;
}

} // namespace qbandit

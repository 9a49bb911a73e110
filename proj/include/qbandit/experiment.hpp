#pragma once
// Experiment specs: JSON in, RegretSeries CSV + sidecar JSON + bound overlay
// CSV + gnuplot script out.
//
// Spec grammar (schema 1). Unknown keys are errors.
//
//   {
//     "schema": 1,
//     "name": "fig1",
//     "instance": {"U": 1, "K": 5, "lambda": [0.55], "mu": [[...]]},   // or
//     "sweep": {"eps": [0.05, 0.1], "mu": [[K=5 row], [K=7 row]]},      // U = 1
//     "policies": [{"policy": "qths", "explore_const": 3, "label": "..."}],
//     "horizon": 200000, "episodes": 2000, "seed": 1, "output_dir": "out",
//     optional: "coupling" ("common_uniform" | "independent_services"),
//               "initial_law" ("recursion_stationary" | "pre_service"),
//               "shared_initial" (bool), "points_per_decade", "record_every",
//               "table_checkpoints" ([slots]), "alpha", "gamma"
//   }
//
// A sweep row fixes K and mu; lambda = max(row) - eps. Every run uses the
// same master seed, so policies are compared on common random numbers.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbandit/bounds.hpp"
#include "qbandit/core.hpp"
#include "qbandit/policies.hpp"
#include "qbandit/sim.hpp"

namespace qbandit {

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct PolicySpec {
    PolicyKind kind;
    std::string label;
};

struct InstanceSpec {
    std::string label;
    // Raw rates; validated when the experiment runs so that an invalid
    // instance maps to its own exit code.
    std::size_t U = 1, K = 1;
    std::vector<double> lambda;
    std::vector<std::vector<double>> mu;
};

struct ExperimentSpec {
    std::string name;
    std::vector<InstanceSpec> instances;
    std::vector<PolicySpec> policies;
    Slot horizon = 0;
    std::int64_t episodes = 0;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    CouplingMode coupling = CouplingMode::CommonUniform;
    InitialLaw initial_law = InitialLaw::RecursionStationary;
    bool shared_initial = true;
    int points_per_decade = 200;
    Slot record_every = 0;
    std::vector<Slot> table_checkpoints;
    OverlayOptions overlay;
};

namespace detail {

inline int line_at_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" at or after `from`, 0 if absent.
inline int line_of_key(const std::string& text, const std::string& key, std::size_t from = 0) {
    const auto pos = text.find('"' + key + '"', from);
    return pos == std::string::npos ? 0 : line_at_offset(text, pos);
}

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string label_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace detail

inline ExperimentSpec parse_experiment(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(detail::line_at_offset(text, e.byte > 0 ? e.byte - 1 : 0), e.what());
    }
    auto fail = [&](const std::string& key, const std::string& msg) -> void {
        throw ConfigError(detail::line_of_key(text, key), msg);
    };
    if (!j.is_object()) throw ConfigError(1, "experiment spec must be a JSON object");

    static const std::vector<std::string> known = {
        "schema",   "name",           "instance",       "sweep",    "policies",          "horizon",
        "episodes", "seed",           "output_dir",     "coupling", "initial_law",       "shared_initial",
        "points_per_decade", "record_every", "table_checkpoints", "alpha", "gamma"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) fail(key, "unknown key '" + key + "'");
    for (const char* key : {"schema", "name", "policies", "horizon", "episodes", "seed", "output_dir"})
        if (!j.contains(key)) throw ConfigError(0, std::string("missing required key '") + key + "'");

    ExperimentSpec spec;
    auto get = [&](const char* key, auto& out) {
        try {
            j.at(key).get_to(out);
        } catch (const json::exception&) {
            fail(key, std::string("bad value for '") + key + "'");
        }
    };
    int schema = 0;
    get("schema", schema);
    if (schema != 1) fail("schema", "unsupported schema " + std::to_string(schema) + " (expected 1)");
    get("name", spec.name);
    get("horizon", spec.horizon);
    get("episodes", spec.episodes);
    get("seed", spec.seed);
    std::string out;
    get("output_dir", out);
    spec.output_dir = out;
    if (spec.horizon < 1) fail("horizon", "horizon must be >= 1");
    if (spec.episodes < 2) fail("episodes", "episodes must be >= 2");

    if (j.contains("coupling")) {
        std::string c;
        get("coupling", c);
        if (c == "common_uniform") spec.coupling = CouplingMode::CommonUniform;
        else if (c == "independent_services") spec.coupling = CouplingMode::IndependentServices;
        else fail("coupling", "coupling must be 'common_uniform' or 'independent_services'");
    }
    if (j.contains("initial_law")) {
        std::string c;
        get("initial_law", c);
        if (c == "recursion_stationary") spec.initial_law = InitialLaw::RecursionStationary;
        else if (c == "pre_service") spec.initial_law = InitialLaw::PreService;
        else fail("initial_law", "initial_law must be 'recursion_stationary' or 'pre_service'");
    }
    if (j.contains("shared_initial")) get("shared_initial", spec.shared_initial);
    if (j.contains("points_per_decade")) get("points_per_decade", spec.points_per_decade);
    if (j.contains("record_every")) get("record_every", spec.record_every);
    if (j.contains("table_checkpoints")) get("table_checkpoints", spec.table_checkpoints);
    if (j.contains("alpha")) get("alpha", spec.overlay.alpha);
    if (j.contains("gamma")) get("gamma", spec.overlay.gamma);
    if (spec.points_per_decade < 1) fail("points_per_decade", "points_per_decade must be >= 1");
    if (spec.record_every < 0) fail("record_every", "record_every must be >= 0");
    for (auto c : spec.table_checkpoints)
        if (c < 1 || c > spec.horizon) fail("table_checkpoints", "table checkpoint outside [1, horizon]");
    if (!(spec.overlay.alpha > 0.0 && spec.overlay.alpha < 1.0)) fail("alpha", "alpha must be in (0,1)");
    if (!(spec.overlay.gamma > 1.0 / (1.0 - spec.overlay.alpha))) fail("gamma", "gamma must exceed 1/(1-alpha)");

    const bool has_instance = j.contains("instance"), has_sweep = j.contains("sweep");
    if (has_instance == has_sweep) throw ConfigError(0, "exactly one of 'instance' or 'sweep' is required");
    if (has_instance) {
        const auto& ji = j.at("instance");
        InstanceSpec is;
        is.label = "instance";
        try {
            for (const auto& [key, _] : ji.items())
                if (key != "U" && key != "K" && key != "lambda" && key != "mu")
                    fail(key, "unknown instance key '" + key + "'");
            ji.at("U").get_to(is.U);
            ji.at("K").get_to(is.K);
            ji.at("lambda").get_to(is.lambda);
            ji.at("mu").get_to(is.mu);
        } catch (const json::exception&) {
            fail("instance", "instance needs integer U, K, a lambda array and a mu matrix");
        }
        spec.instances.push_back(std::move(is));
    } else {
        const auto& js = j.at("sweep");
        std::vector<double> eps;
        std::vector<std::vector<double>> rows;
        try {
            for (const auto& [key, _] : js.items())
                if (key != "eps" && key != "mu") fail(key, "unknown sweep key '" + key + "'");
            js.at("eps").get_to(eps);
            js.at("mu").get_to(rows);
        } catch (const json::exception&) {
            fail("sweep", "sweep needs an 'eps' list and a 'mu' list of rows");
        }
        if (eps.empty() || rows.empty()) fail("sweep", "sweep lists must be non-empty");
        for (const auto& row : rows) {
            if (row.empty()) fail("sweep", "empty mu row in sweep");
            const double best = *std::max_element(row.begin(), row.end());
            for (double e : eps) {
                InstanceSpec is;
                is.label = "K" + std::to_string(row.size()) + "_eps" + detail::label_number(e);
                is.U = 1;
                is.K = row.size();
                is.lambda = {best - e};
                is.mu = {row};
                spec.instances.push_back(std::move(is));
            }
        }
    }

    const auto& jp = j.at("policies");
    if (!jp.is_array() || jp.empty()) fail("policies", "'policies' must be a non-empty array");
    std::size_t search_from = text.find("\"policies\"");
    for (const auto& p : jp) {
        const int line = detail::line_of_key(text, "policy", search_from);
        search_from = text.find("\"policy\"", search_from);
        if (search_from != std::string::npos) ++search_from;
        if (!p.is_object()) throw ConfigError(line, "policy entries must be objects");
        for (const auto& [key, _] : p.items())
            if (key != "policy" && key != "explore_const" && key != "label")
                throw ConfigError(line, "unknown policy key '" + key + "'");
        PolicySpec ps;
        std::string name;
        try {
            p.at("policy").get_to(name);
        } catch (const json::exception&) {
            throw ConfigError(line, "policy entry needs a string 'policy'");
        }
        const auto type = parse_policy_type(name);
        if (!type) throw ConfigError(line, "unknown policy '" + name + "'");
        ps.kind.type = *type;
        ps.kind.explore_const = 3.0;
        if (p.contains("explore_const")) {
            if (!p.at("explore_const").is_number()) throw ConfigError(line, "explore_const must be a number");
            ps.kind.explore_const = p.at("explore_const").get<double>();
            if (!ps.kind.gated()) throw ConfigError(line, "explore_const only applies to qths and qucb");
        }
        try {
            check_policy(ps.kind);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(line, e.what());
        }
        if (p.contains("label")) {
            if (!p.at("label").is_string()) throw ConfigError(line, "label must be a string");
            ps.label = p.at("label").get<std::string>();
        } else {
            ps.label = std::string(policy_name(ps.kind.type));
            if (ps.kind.gated()) ps.label += "_c" + detail::label_number(ps.kind.explore_const);
        }
        for (const auto& other : spec.policies)
            if (other.label == ps.label) throw ConfigError(line, "duplicate policy label '" + ps.label + "'");
        spec.policies.push_back(std::move(ps));
    }
    return spec;
}

inline std::string coupling_name(CouplingMode m) {
    return m == CouplingMode::CommonUniform ? "common_uniform" : "independent_services";
}
inline std::string initial_law_name(InitialLaw l) {
    return l == InitialLaw::RecursionStationary ? "recursion_stationary" : "pre_service";
}

/// CSV columns: t,queue,psi,halfwidth,regen_age_mean,explore_frac (queue is 1-based).
inline void write_series_csv(std::ostream& os, const RegretSeries& s) {
    os << "t,queue,psi,halfwidth,regen_age_mean,explore_frac\n";
    for (std::size_t i = 0; i < s.times.size(); ++i)
        for (std::size_t u = 0; u < s.queues; ++u) {
            const std::size_t idx = i * s.queues + u;
            os << s.times[i] << ',' << (u + 1) << ',' << detail::format_number(s.psi[idx]) << ','
               << detail::format_number(s.half_width[idx]) << ',' << detail::format_number(s.regen_age[idx]) << ','
               << detail::format_number(s.explore_frac[i]) << '\n';
        }
}

/// CSV columns: t,bound_name,value,valid_flag.
inline void write_bounds_csv(std::ostream& os, const std::vector<BoundCurve>& curves) {
    os << "t,bound_name,value,valid_flag\n";
    for (const auto& c : curves)
        for (std::size_t i = 0; i < c.t.size(); ++i)
            os << detail::format_number(c.t[i]) << ',' << c.name << ',' << detail::format_number(c.value[i]) << ','
               << (c.valid[i] ? 1 : 0) << '\n';
}

inline nlohmann::json sidecar_json(const ExperimentSpec& spec, const SimConfig& cfg, const std::string& label,
                                   const std::vector<BoundCurve>& curves, const RegretSeries& s) {
    nlohmann::json tables = nlohmann::json::array();
    for (std::size_t c = 0; c < s.table_times.size(); ++c) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t u = 0; u < s.queues; ++u) {
            std::vector<double> row(s.servers);
            for (std::size_t k = 0; k < s.servers; ++k) row[k] = s.mean_T[(c * s.queues + u) * s.servers + k];
            rows.push_back(row);
        }
        tables.push_back({{"t", s.table_times[c]}, {"mean_T", rows}});
    }
    nlohmann::json bounds = nlohmann::json::array();
    for (const auto& c : curves) {
        nlohmann::json b = {{"name", c.name}, {"valid_from", c.valid_from}, {"caveat", c.caveat}};
        b["valid_to"] = c.valid_to ? nlohmann::json(*c.valid_to) : nlohmann::json(nullptr);
        bounds.push_back(b);
    }
    return {{"schema", 1},
            {"experiment", spec.name},
            {"run", label},
            {"instance", instance_to_json(cfg.instance)},
            {"policy", {{"policy", std::string(policy_name(cfg.policy.type))}, {"explore_const", cfg.policy.explore_const}}},
            {"horizon", cfg.horizon},
            {"episodes", cfg.episodes},
            {"master_seed", cfg.master_seed},
            {"coupling", coupling_name(cfg.coupling)},
            {"initial_law", initial_law_name(cfg.initial_law)},
            {"shared_initial", cfg.shared_initial},
            {"points_per_decade", cfg.points_per_decade},
            {"record_every", cfg.record_every},
            {"alpha", spec.overlay.alpha},
            {"gamma", spec.overlay.gamma},
            {"bounds", bounds},
            {"checkpoint_tables", tables}};
}

// Gnuplot script: log-log psi with its 95% band, plus the valid part of the
// late-stage bound curves.
inline std::string plot_script(const std::string& title, const std::vector<std::string>& csvs,
                               const std::vector<std::string>& labels, const std::string& png) {
    std::ostringstream os;
    os << "# gnuplot script; run: gnuplot <this file>\n"
       << "set datafile separator ','\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output '" << png << "'\n"
       << "set logscale xy\n"
       << "set xlabel 't'\nset ylabel 'queue-regret psi(t)'\n"
       << "set title '" << title << "'\n"
       << "set key top right\n"
       << "plot ";
    for (std::size_t i = 0; i < csvs.size(); ++i) {
        if (i) os << ", \\\n     ";
        os << "'" << csvs[i] << "' every ::1 using 1:($3>0?$3:1/0) with lines lw 2 title '" << labels[i] << "'";
    }
    os << "\n";
    return os.str();
}

struct RunSummary {
    std::vector<std::filesystem::path> written;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

/// Runs every (instance, policy) pair. Instances are validated up front, so an
/// invalid one throws InstanceError before any simulation starts.
inline RunSummary run_experiment(const ExperimentSpec& spec, unsigned workers = 0) {
    std::vector<ProblemInstance> instances;
    for (const auto& is : spec.instances) instances.push_back(validate_instance(is.U, is.K, is.lambda, is.mu));

    std::filesystem::create_directories(spec.output_dir);
    RunSummary summary;
    std::vector<std::string> csvs, labels;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        for (const auto& ps : spec.policies) {
            SimConfig cfg;
            cfg.instance = instances[i];
            cfg.policy = ps.kind;
            cfg.horizon = spec.horizon;
            cfg.episodes = spec.episodes;
            cfg.coupling = spec.coupling;
            cfg.master_seed = spec.seed;
            cfg.points_per_decade = spec.points_per_decade;
            cfg.record_every = spec.record_every;
            cfg.table_checkpoints = spec.table_checkpoints;
            cfg.initial_law = spec.initial_law;
            cfg.shared_initial = spec.shared_initial;
            cfg.workers = workers;
            const auto series = estimate_regret(cfg);
            const auto curves = bound_overlays(cfg.instance, series.times, spec.overlay);

            const std::string label = spec.instances[i].label + "__" + ps.label;
            const std::string stem = spec.name + "__" + label;
            std::ostringstream csv, bcsv;
            write_series_csv(csv, series);
            write_bounds_csv(bcsv, curves);
            const auto dir = spec.output_dir;
            write_file(dir / (stem + ".csv"), csv.str());
            write_file(dir / (stem + "_bounds.csv"), bcsv.str());
            write_file(dir / (stem + ".json"), sidecar_json(spec, cfg, label, curves, series).dump(2) + "\n");
            write_file(dir / (stem + ".gp"), plot_script(stem, {stem + ".csv"}, {label}, stem + ".png"));
            for (const char* ext : {".csv", "_bounds.csv", ".json", ".gp"}) summary.written.push_back(dir / (stem + ext));
            csvs.push_back(stem + ".csv");
            labels.push_back(label);
        }
    }
    write_file(spec.output_dir / (spec.name + ".gp"), plot_script(spec.name, csvs, labels, spec.name + ".png"));
    summary.written.push_back(spec.output_dir / (spec.name + ".gp"));
    return summary;
}

} // namespace qbandit

// qbandit command line: run experiments, acceptance suites and closed-form bounds.
//
// Exit codes: 0 success, 1 config error (also failed verify), 2 invalid instance.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbandit/qbandit.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kInvalidInstance = 2;

int cmd_run(const std::string& path, const std::string& out_dir) {
    qbandit::ExperimentSpec spec;
    try {
        spec = qbandit::parse_experiment(qbandit::read_file(path));
    } catch (const qbandit::ConfigError& e) {
        std::cerr << path << ": " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << path << ": " << e.what() << "\n";
        return kConfigError;
    }
    if (!out_dir.empty()) spec.output_dir = out_dir;
    try {
        const auto summary = qbandit::run_experiment(spec);
        for (const auto& p : summary.written) std::cout << p.string() << "\n";
    } catch (const qbandit::InstanceError& e) {
        std::cerr << path << ": invalid instance: " << e.what() << "\n";
        return kInvalidInstance;
    }
    return 0;
}

int cmd_verify(const std::string& suite) {
    if (!qbandit::is_suite_name(suite)) {
        std::cerr << "unknown suite '" << suite << "'; expected one of: all";
        for (const auto& [name, fn] : qbandit::verify_suites()) std::cerr << " " << name;
        std::cerr << "\n";
        return kConfigError;
    }
    bool all_passed = true;
    qbandit::run_verify(suite, {}, [&](const qbandit::CriterionResult& r) {
        std::cout << qbandit::format_result(r) << std::endl;
        all_passed = all_passed && r.passed;
    });
    return all_passed ? 0 : 1;
}

int cmd_bounds(const std::string& path, double alpha, double gamma, const std::vector<double>& slots) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(qbandit::read_file(path));
    } catch (const std::exception& e) {
        std::cerr << path << ": " << e.what() << "\n";
        return kConfigError;
    }
    if (!(alpha > 0.0 && alpha < 1.0) || !(gamma > 1.0 / (1.0 - alpha))) {
        std::cerr << "need 0 < alpha < 1 and gamma > 1/(1-alpha)\n";
        return kConfigError;
    }
    for (double t : slots)
        if (!(t >= 3.0)) {
            std::cerr << "slots must be >= 3\n";
            return kConfigError;
        }
    try {
        const auto inst = qbandit::instance_from_json(j);
        const auto& d = inst.derived();
        std::vector<qbandit::Slot> times;
        for (double t : slots) times.push_back(static_cast<qbandit::Slot>(t));
        nlohmann::json out;
        out["instance"] = qbandit::instance_to_json(inst);
        out["alpha"] = alpha;
        out["gamma"] = gamma;
        out["k_star"] = d.k_star;
        out["eps"] = d.eps;
        out["delta"] = d.delta;
        out["d_mu"] = qbandit::d_mu(inst);
        nlohmann::json curves = nlohmann::json::array();
        for (const auto& c : qbandit::bound_overlays(inst, times, {alpha, gamma})) {
            nlohmann::json cj{{"name", c.name}, {"valid_from", c.valid_from}, {"caveat", c.caveat},
                              {"t", c.t}, {"value", c.value}, {"valid", c.valid}};
            cj["valid_to"] = c.valid_to ? nlohmann::json(*c.valid_to) : nlohmann::json(nullptr);
            curves.push_back(cj);
        }
        out["curves"] = curves;
        std::cout << out.dump(2) << "\n";
    } catch (const qbandit::InstanceError& e) {
        std::cerr << path << ": invalid instance: " << e.what() << "\n";
        return kInvalidInstance;
    } catch (const std::exception& e) {
        std::cerr << path << ": " << e.what() << "\n";
        return kConfigError;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Queueing bandit simulator. Worker threads: QBANDIT_WORKERS (default: all cores)."};
    app.require_subcommand(1);

    std::string spec_path, out_dir;
    auto* run = app.add_subcommand("run", "Run an experiment spec and write CSV, sidecar, bounds and plot files");
    run->add_option("spec", spec_path, "experiment spec (JSON)")->required();
    run->add_option("--out", out_dir, "override output_dir");

    std::string suite;
    auto* verify = app.add_subcommand("verify", "Run acceptance suites");
    verify->add_option("suite", suite, "all | stationary | genie | dominance | regen | phase | peakshift | "
                                       "projection | exploration | bounds | suboptimal")
        ->required();

    std::string inst_path;
    double alpha = 0.5, gamma = 3.0;
    std::vector<double> slots{10, 100, 1000, 10000, 100000, 1000000};
    auto* bounds = app.add_subcommand("bounds", "Evaluate closed-form bounds for an instance");
    bounds->add_option("instance", inst_path, "instance JSON {U, K, lambda, mu}")->required();
    bounds->add_option("--alpha", alpha, "consistency exponent in (0,1)")->capture_default_str();
    bounds->add_option("--gamma", gamma, "window exponent, > 1/(1-alpha)")->capture_default_str();
    bounds->add_option("--t", slots, "slots to evaluate")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }
    try {
        if (*run) return cmd_run(spec_path, out_dir);
        if (*verify) return cmd_verify(suite);
        if (*bounds) return cmd_bounds(inst_path, alpha, gamma, slots);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return 0;
}

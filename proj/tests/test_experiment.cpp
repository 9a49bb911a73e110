#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "qbandit/experiment.hpp"

using namespace qbandit;
namespace fs = std::filesystem;

namespace {

const char* kSpec = R"({
  "schema": 1,
  "name": "tiny",
  "instance": {"U": 1, "K": 3, "lambda": [0.5], "mu": [[0.65, 0.48, 0.2]]},
  "policies": [{"policy": "qths", "explore_const": 3}, {"policy": "thompson"}],
  "horizon": 300,
  "episodes": 8,
  "seed": 5,
  "output_dir": "OUT"
})";

std::string with_out(std::string text, const fs::path& out) {
    text.replace(text.find("OUT"), 3, out.string());
    return text;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("qbandit_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int line_of_error(const std::string& text) {
    try {
        parse_experiment(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QBANDIT_CLI) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST(Parse, Minimal) {
    const auto spec = parse_experiment(kSpec);
    EXPECT_EQ(spec.name, "tiny");
    ASSERT_EQ(spec.instances.size(), 1u);
    ASSERT_EQ(spec.policies.size(), 2u);
    EXPECT_EQ(spec.policies[0].label, "qths_c3");
    EXPECT_EQ(spec.policies[1].label, "thompson");
    EXPECT_EQ(spec.coupling, CouplingMode::CommonUniform);
    EXPECT_EQ(spec.points_per_decade, 200);
}

TEST(Parse, Sweep) {
    const auto spec = parse_experiment(R"({"schema":1,"name":"s","sweep":{"eps":[0.05,0.1],
        "mu":[[0.65,0.48,0.4,0.3,0.2],[0.65,0.48,0.44,0.4,0.35,0.3,0.2]]},
        "policies":[{"policy":"qths"}],"horizon":10,"episodes":2,"seed":1,"output_dir":"o"})");
    ASSERT_EQ(spec.instances.size(), 4u);
    EXPECT_EQ(spec.instances[0].label, "K5_eps0.05");
    EXPECT_EQ(spec.instances[3].label, "K7_eps0.1");
    EXPECT_NEAR(spec.instances[1].lambda[0], 0.55, 1e-12);
}

TEST(Parse, ErrorsCarryLines) {
    EXPECT_EQ(line_of_error("{\n\"schema\": 1,\n\"bogus\": 2\n}"), 3);
    EXPECT_EQ(line_of_error("{\n\"schema\": 1,\n\"name\": \"x\",,\n}"), 3);
    std::string bad_policy = kSpec;
    bad_policy.replace(bad_policy.find("\"thompson\""), 10, "\"egreedy\"");
    EXPECT_EQ(line_of_error(bad_policy), 5);
    std::string bad_horizon = kSpec;
    bad_horizon.replace(bad_horizon.find("300"), 3, "-1");
    EXPECT_EQ(line_of_error(bad_horizon), 6);
    std::string schema2 = kSpec;
    schema2.replace(schema2.find("\"schema\": 1"), 11, "\"schema\": 2");
    EXPECT_EQ(line_of_error(schema2), 2);
}

TEST(Parse, Rejects) {
    auto expect_error = [](std::string text, const std::string& from, const std::string& to) {
        text.replace(text.find(from), from.size(), to);
        EXPECT_THROW(parse_experiment(text), ConfigError) << to;
    };
    expect_error(kSpec, "\"thompson\"}", "\"thompson\", \"explore_const\": 1}");
    expect_error(kSpec, "\"explore_const\": 3", "\"explore_const\": -3");
    expect_error(kSpec, "{\"policy\": \"thompson\"}", "{\"policy\": \"qths\", \"explore_const\": 3}");
    expect_error(kSpec, "\"seed\": 5", "\"seed\": 5, \"alpha\": 1.5");
    expect_error(kSpec, "\"seed\": 5", "\"seed\": 5, \"gamma\": 1.5");
    expect_error(kSpec, "\"seed\": 5", "\"seed\": 5, \"coupling\": \"weird\"");
    expect_error(kSpec, "\"seed\": 5,", "");
    expect_error(kSpec, "\"episodes\": 8", "\"episodes\": 1");
}

TEST(Run, WritesArtifacts) {
    const auto dir = scratch("run");
    const auto spec = parse_experiment(with_out(kSpec, dir));
    const auto summary = run_experiment(spec, 1);
    EXPECT_EQ(summary.written.size(), 9u);
    for (const auto& p : summary.written) EXPECT_TRUE(fs::exists(p)) << p;
    const std::string csv = read_file(dir / "tiny__instance__qths_c3.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,queue,psi,halfwidth,regen_age_mean,explore_frac");
    const std::string bcsv = read_file(dir / "tiny__instance__qths_c3_bounds.csv");
    EXPECT_EQ(bcsv.substr(0, bcsv.find('\n')), "t,bound_name,value,valid_flag");
    const auto side = nlohmann::json::parse(read_file(dir / "tiny__instance__thompson.json"));
    EXPECT_EQ(side["master_seed"], 5);
    EXPECT_EQ(side["policy"]["policy"], "thompson");
    EXPECT_NE(read_file(dir / "tiny.gp").find("logscale"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Run, ByteIdenticalAcrossWorkerCounts) {
    const auto d1 = scratch("w1"), d4 = scratch("w4");
    run_experiment(parse_experiment(with_out(kSpec, d1)), 1);
    run_experiment(parse_experiment(with_out(kSpec, d4)), 4);
    for (const char* f : {"tiny__instance__qths_c3.csv", "tiny__instance__thompson.csv",
                          "tiny__instance__qths_c3_bounds.csv"})
        EXPECT_EQ(read_file(d1 / f), read_file(d4 / f)) << f;
    fs::remove_all(d1);
    fs::remove_all(d4);
}

TEST(Run, InvalidInstanceThrowsBeforeWriting) {
    const auto dir = scratch("bad") / "nested";
    std::string text = with_out(kSpec, dir);
    text.replace(text.find("[0.5]"), 5, "[0.7]");
    EXPECT_THROW(run_experiment(parse_experiment(text)), InstanceError);
    EXPECT_FALSE(fs::exists(dir));
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    write_file(dir / "good.json", with_out(kSpec, dir / "out"));
    EXPECT_EQ(run_cli("run " + (dir / "good.json").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "tiny__instance__qths_c3.csv"));

    std::string bad_inst = with_out(kSpec, dir / "out2");
    bad_inst.replace(bad_inst.find("[0.5]"), 5, "[0.7]");
    write_file(dir / "unstable.json", bad_inst);
    EXPECT_EQ(run_cli("run " + (dir / "unstable.json").string()), 2);

    write_file(dir / "broken.json", "{\"schema\": 1,");
    EXPECT_EQ(run_cli("run " + (dir / "broken.json").string()), 1);
    EXPECT_EQ(run_cli("run " + (dir / "missing.json").string()), 1);

    write_file(dir / "inst.json", R"({"U": 1, "K": 5, "lambda": [0.55], "mu": [[0.65, 0.48, 0.4, 0.3, 0.2]]})");
    EXPECT_EQ(run_cli("bounds " + (dir / "inst.json").string() + " --alpha 0.5 --gamma 3"), 0);
    EXPECT_EQ(run_cli("bounds " + (dir / "inst.json").string() + " --alpha 0.5 --gamma 1.5"), 1);
    write_file(dir / "tie.json", R"({"U": 1, "K": 2, "lambda": [0.3], "mu": [[0.5, 0.5]]})");
    EXPECT_EQ(run_cli("bounds " + (dir / "tie.json").string()), 2);

    EXPECT_EQ(run_cli("verify bounds"), 0);
    EXPECT_EQ(run_cli("verify nosuchsuite"), 1);
    EXPECT_EQ(run_cli(""), 1);
    fs::remove_all(dir);
}

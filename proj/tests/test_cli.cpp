#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/run.hpp"

namespace fs = std::filesystem;
using mqed::cli::json;

namespace {

const fs::path scenarios{MQED_SCENARIOS};

fs::path fresh_dir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("mqed_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run(const std::string& args) {
    const std::string cmd = std::string(MQED_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

json load(const std::string& name) { return json::parse(slurp(scenarios / (name + ".json"))); }

std::size_t count_files(const fs::path& dir) {
    return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}));
}

} // namespace

TEST(Cli, EveryScenarioRuns) {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"invariants_modes", "modes"},         {"sommerfeld_fidelity", "green"},
        {"conversion_p1", "check-p1"},         {"magic_bulk", "check-magic"},
        {"surface_term", "check-surface"},     {"appendix_lossless", "check-appendix"},
        {"kernel_equivalence", "ww"},          {"detuned_rabi", "ww"},
        {"master_routes", "master"},           {"master_thermal", "master"}};
    const auto out = fresh_dir("all");
    for (const auto& [name, cmd] : cases) {
        EXPECT_EQ(run(cmd + " --config " + (scenarios / (name + ".json")).string() + " --out " + out.string()), 0)
            << name;
        const fs::path report = out / (name + "_" + cmd + ".json");
        ASSERT_TRUE(fs::exists(report)) << name;
        const json env = json::parse(slurp(report));
        EXPECT_EQ(env.at("subcommand"), cmd);
        for (const auto& f : env.at("outputs")) EXPECT_TRUE(fs::exists(f.get<std::string>()));
    }
    fs::remove_all(out);
}

TEST(Cli, MissingAtomFailsBeforeWriting) {
    const auto dir = fresh_dir("noatom");
    json j = load("vacuum_decay");
    j.erase("atom");
    const auto cfg = write_config(dir, "in.json", j);
    const fs::path out = dir / "out";
    EXPECT_EQ(run("ww --config " + cfg.string() + " --out " + out.string()), 2);
    EXPECT_FALSE(fs::exists(out));
    fs::remove_all(dir);
}

TEST(Cli, UnknownKeyAndBadValuesAreSchemaErrors) {
    const auto dir = fresh_dir("schema");
    json j = load("detuned_rabi");
    j["atom"]["colour"] = "blue";
    EXPECT_EQ(run("ww --config " + write_config(dir, "a.json", j).string() + " --out " + dir.string()), 2);
    j = load("detuned_rabi");
    j["atom"]["omega0"] = -1.0;
    EXPECT_EQ(run("ww --config " + write_config(dir, "b.json", j).string() + " --out " + dir.string()), 2);
    std::ofstream(dir / "c.json") << "{ not json";
    EXPECT_EQ(run("ww --config " + (dir / "c.json").string() + " --out " + dir.string()), 2);
    EXPECT_EQ(run("ww --config " + (dir / "missing.json").string() + " --out " + dir.string()), 4);
    EXPECT_EQ(count_files(dir), 3u);
    fs::remove_all(dir);
}

TEST(Cli, CsvOutputIsDeterministicAndInputUntouched) {
    const fs::path cfg = scenarios / "detuned_rabi.json";
    const std::string before = slurp(cfg);
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
    ASSERT_EQ(run("ww --config " + cfg.string() + " --out " + a.string()), 0);
    ASSERT_EQ(run("ww --config " + cfg.string() + " --out " + b.string() + " --format csv"), 0);
    const std::string name = json::parse(before).at("name").get<std::string>() + "_ww.csv";
    const std::string csv = slurp(a / name);
    EXPECT_FALSE(csv.empty());
    EXPECT_EQ(csv, slurp(b / name));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,re_c,im_c,P");
    EXPECT_FALSE(fs::exists(b / (json::parse(before).at("name").get<std::string>() + "_ww.json")));
    EXPECT_EQ(slurp(cfg), before);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Cli, SetOverridesReachTheEcho) {
    const auto dir = fresh_dir("set");
    ASSERT_EQ(run("ww --config " + (scenarios / "detuned_rabi.json").string() + " --out " + dir.string() +
                  " --set atom.omega0=4.4 --set name=renamed"),
              0);
    const json env = json::parse(slurp(dir / "renamed_ww.json"));
    EXPECT_EQ(env.at("scenario").at("atom").at("omega0").get<double>(), 4.4);
    EXPECT_EQ(run("ww --config " + (scenarios / "detuned_rabi.json").string() + " --out " + dir.string() +
                  " --set atom.omega0=-3"),
              2);
    fs::remove_all(dir);
}

TEST(Cli, EchoRoundTrip) {
    for (const auto& entry : fs::directory_iterator(scenarios)) {
        const json raw = json::parse(slurp(entry.path()));
        const auto first = mqed::cli::parse_scenario(raw);
        const json echo = mqed::cli::to_json(first);
        EXPECT_EQ(mqed::cli::to_json(mqed::cli::parse_scenario(echo)), echo) << entry.path();
    }
}

TEST(Cli, OverrideParsing) {
    json j = json::object();
    mqed::cli::apply_override(j, "a.b=3.5");
    mqed::cli::apply_override(j, "a.c=lna");
    mqed::cli::apply_override(j, "d=[1,2]");
    EXPECT_EQ(j["a"]["b"].get<double>(), 3.5);
    EXPECT_EQ(j["a"]["c"].get<std::string>(), "lna");
    EXPECT_EQ(j["d"].size(), 2u);
    EXPECT_THROW(mqed::cli::apply_override(j, "novalue"), mqed::cli::SchemaError);
}

// mqed: scenario-driven front end.
//   mqed <subcommand> --config scenario.json [--out dir] [--format csv|json] [--set a.b=v]... [--quiet]
// Exit codes: 0 ok, 2 schema/domain, 3 convergence/instability, 4 I/O, 1 other.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cli/run.hpp"

namespace fs = std::filesystem;
using namespace mqed;
using namespace mqed::cli;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError("config '" + path + "' is not valid JSON");
    return j;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

int fail(int code, const std::string& type, const std::string& message, json extra = json::object()) {
    json err{{"type", type}, {"message", message}, {"exit_code", code}};
    for (auto it = extra.begin(); it != extra.end(); ++it) err[it.key()] = it.value();
    std::cerr << json{{"error", err}}.dump(2) << std::endl;
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Normal-mode and Green-tensor QED toolkit"};
    app.require_subcommand(1);
    std::string config, out_dir, format = "json";
    std::vector<std::string> overrides;
    bool quiet = false;
    if (const char* env = std::getenv("MQED_OUT_DIR")) out_dir = env;

    for (const auto& name : subcommands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "scenario JSON file")->required();
        sub->add_option("--out", out_dir, "output directory (default: $MQED_OUT_DIR or .)");
        sub->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--set", overrides, "override a scenario key, path.to.key=value");
        sub->add_flag("--quiet", quiet, "suppress the report on stdout");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail(2, "usage", e.what());
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (out_dir.empty()) out_dir = ".";

    try {
        const auto t0 = std::chrono::steady_clock::now();
        json raw = read_config(config);
        for (const auto& o : overrides) apply_override(raw, o);
        const Scenario scenario = parse_scenario(raw);
        validate_for(cmd, scenario);
        const double t_parse = seconds_since(t0);

        const auto t1 = std::chrono::steady_clock::now();
        RunOutput run = dispatch(cmd, scenario);
        const double t_run = seconds_since(t1);

        const auto t2 = std::chrono::steady_clock::now();
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
        json outputs = json::array();
        for (const auto& f : run.files) {
            const fs::path p = fs::path(out_dir) / f.name;
            write_file(p, f.content);
            outputs.push_back(p.string());
        }
        const fs::path report_path = fs::path(out_dir) / (scenario.name + "_" + cmd + ".json");
        if (format == "json") outputs.push_back(report_path.string());

        json envelope{{"subcommand", cmd},
                      {"version", mqed::version},
                      {"scenario", to_json(scenario)},
                      {"outputs", outputs},
                      {"warnings", run.warnings},
                      {"result", run.result}};
        envelope["timings"] = {{"parse_s", t_parse}, {"run_s", t_run}, {"write_s", seconds_since(t2)}};
        if (format == "json") write_file(report_path, envelope.dump(2) + "\n");
        if (!quiet) std::cout << envelope.dump(2) << std::endl;
        return 0;
    } catch (const SchemaError& e) {
        return fail(2, "schema", e.what());
    } catch (const DomainError& e) {
        return fail(2, "domain", e.what());
    } catch (const ConvergenceError& e) {
        return fail(3, "convergence", e.what(),
                    {{"best_estimate_norm", e.best_estimate_norm()}, {"error_bound", e.error_bound()}});
    } catch (const InstabilityError& e) {
        return fail(3, "instability", e.what(), {{"time", e.time()}});
    } catch (const IoError& e) {
        return fail(4, "io", e.what());
    } catch (const json::exception& e) {
        return fail(2, "schema", e.what());
    } catch (const std::exception& e) {
        return fail(1, "internal", e.what());
    }
}

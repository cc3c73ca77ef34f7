// Command-line front end: mmdlab [boxdim|mdim|demo-closure|semigroup] [flags]
// The subcommand may instead come from `command = ...` in the config file.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmd/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Metric mean dimension laboratory"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_path;
    std::map<std::string, std::string> flags;
    std::vector<std::string> overrides;
    bool check = false, export_matrix = false;

    app.add_option("--config", config_path, "key = value configuration file");
    for (const char* key : {"eps-start", "eps-stop", "eps-ratio", "depth", "budget", "threads",
                            "seed", "out"}) {
        app.add_option_function<std::string>(
            std::string("--") + key, [&flags, key](const std::string& v) { flags[key] = v; },
            std::string("overrides `") + key + "`");
    }
    app.add_option("--set", overrides, "any configuration key as KEY=VALUE (repeatable)");
    app.add_flag("--check", check, "exit 3 when the verdict is FAIL");
    app.add_flag("--export-matrix", export_matrix, "write matrix_<eps>.txt per scale");

    for (const char* name : {"boxdim", "mdim", "demo-closure", "semigroup"})
        app.add_subcommand(name, std::string("run the ") + name + " pipeline");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : mmd::kExitConfig;
    }

    mmd::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = mmd::load_config(config_path);
        for (const auto& [k, v] : flags) mmd::apply_setting(cfg, k, v);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw mmd::ConfigError(0, "--set expects KEY=VALUE");
            mmd::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
    } catch (const mmd::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return mmd::kExitConfig;
    }
    if (!app.get_subcommands().empty()) cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command.empty()) {
        std::cerr << "config error: no command given (subcommand or `command = ...`)\n";
        return mmd::kExitConfig;
    }
    cfg.check = cfg.check || check;
    cfg.export_matrix = cfg.export_matrix || export_matrix;

    const auto outcome = mmd::run(cfg);
    std::fputs(outcome.report.c_str(), outcome.exit_code == mmd::kExitConfig ? stderr : stdout);
    return outcome.exit_code;
}

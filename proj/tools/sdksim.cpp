// sdksim: command-line front end for the spin-dependent kick simulator.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sdk/cli.hpp"
#include "sdk/errors.hpp"

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch == '\n' ? ' ' : ch;
    }
    return out;
}

int fail(std::string_view kind, const std::string& key, const std::string& msg)
{
    std::cerr << "sdksim: error kind=" << kind << " key=" << (key.empty() ? "-" : key) << " msg=\""
              << escape(msg) << "\"\n";
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Ultrafast spin-dependent kick simulator"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::string preset_name;
    sdk::RunOptions options;
    std::string out_dir = ".";
    app.add_option("--config", config_path, "Flat JSON configuration file");
    app.add_option("--preset", preset_name, "Built-in parameter set (paper-2013)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", options.threads, "Worker threads for scans")->check(CLI::PositiveNumber);
    app.add_option("--seed", options.seed, "Seed recorded in outputs");

    const char* help[] = {
        "Delay-line plan for the eight-pulse train",
        "Populations after one pulse train on |down,0>",
        "Fidelity against the ideal kick versus pulse count",
        "Ramsey fringe at a fixed kick delay",
        "Fringe contrast versus kick delay",
        "Kapitza-Dirac order populations",
        "Resonance check of the planned schedule",
    };
    const auto names = sdk::subcommand_names();
    for (std::size_t i = 0; i < names.size(); ++i) app.add_subcommand(names[i], help[i]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail("UsageError", "", e.what());
    }

    try {
        if (!config_path.empty() && !preset_name.empty()) {
            throw sdk::Error(sdk::ErrorKind::SchemaError, "use either --config or --preset",
                             "config");
        }
        sdk::RunConfig config;
        if (!config_path.empty()) {
            config = sdk::load_config(config_path);
            options.config_source = config_path;
        } else {
            const std::string name = preset_name.empty() ? "paper-2013" : preset_name;
            config = sdk::preset(name);
            options.config_source = "preset:" + name;
        }
        options.out_dir = out_dir;
        const std::string sub = app.get_subcommands().front()->get_name();
        for (const auto& p : sdk::run_subcommand(sub, config, options)) {
            std::cout << p.string() << '\n';
        }
    } catch (const sdk::Error& e) {
        return fail(sdk::to_string(e.kind()), e.key(), e.what());
    } catch (const std::exception& e) {
        return fail("Internal", "", e.what());
    }
    return 0;
}

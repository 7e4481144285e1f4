// dqlg <command> --config <path> --out <dir>
//
// Exit codes: 0 success, 2 config error, 3 numeric/domain error, 4 I/O error.
// DQLG_THREADS caps worker threads (0 = all cores).

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dqlg/cli/run.hpp"

namespace {

using dqlg::cli::ErrorRecord;
using dqlg::cli::ExitCode;

int fail(ExitCode code, const std::string& kind, const std::string& message, const std::string& out_dir = "",
         const std::string& command = "") {
    const ErrorRecord record{code, kind, message};
    std::cerr << record.line() << '\n';
    if (!out_dir.empty()) {
        try {
            dqlg::cli::OutputSet::commit_failure(out_dir, command, record);
        } catch (...) {
        }
    }
    return static_cast<int>(code);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirac quantum lattice gas: path-sum oracle, mode operators and wavepacket experiments"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir = ".";
    for (auto name : dqlg::cli::command_names) {
        auto* sub = app.add_subcommand(std::string(name), "run the " + std::string(name) + " experiment");
        sub->add_option("--config,-c", config_path, "flat JSON config document")->check(CLI::ExistingFile);
        sub->add_option("--out,-o", out_dir, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fail(ExitCode::config, "config", e.what());
    }
    const std::string command = app.get_subcommands().front()->get_name();

    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) return fail(ExitCode::io, "io", "cannot read " + config_path, out_dir, command);
        std::stringstream text;
        text << in.rdbuf();
        try {
            doc = nlohmann::json::parse(text.str());
        } catch (const nlohmann::json::parse_error& e) {
            return fail(ExitCode::config, "config", std::string("malformed document: ") + e.what(), out_dir, command);
        }
        if (!doc.is_object())
            return fail(ExitCode::config, "config", "document must be a flat key-value object", out_dir, command);
    }
    if (!doc.contains("command"))
        doc["command"] = command;
    else if (!doc["command"].is_string() || doc["command"].get<std::string>() != command)
        return fail(ExitCode::config, "config", "command: config names a different command than the command line", out_dir,
                    command);

    dqlg::cli::RunConfig config;
    try {
        config = dqlg::cli::parse_config(doc.dump());
    } catch (const dqlg::ConfigError& e) {
        return fail(ExitCode::config, "config", e.what(), out_dir, command);
    }
    config.output_dir = out_dir;
    return dqlg::cli::run(config);
}

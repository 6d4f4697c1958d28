#include <CLI11.hpp>

#include <cstdio>

#include "mp/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pseudospectral Maxwell-Pauli evolution"};
    app.require_subcommand(1);

    std::string config_path, ledger_path;
    std::string output_dir;
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress progress output");
    app.add_option("--output-dir", output_dir, "directory for run artifacts");

    auto* run = app.add_subcommand("run", "evolve a configured system");
    run->add_option("config", config_path, "config file")->required();
    auto* cont = app.add_subcommand("continue", "epsilon continuation family");
    cont->add_option("config", config_path, "config file")->required();
    auto* zm = app.add_subcommand("zeromode", "zero mode candidate and critical charge");
    zm->add_option("config", config_path, "config file")->required();
    auto* audit = app.add_subcommand("audit", "re-check an energy ledger");
    audit->add_option("ledger", ledger_path, "ledger.csv produced by run")->required();
    for (auto* sub : {run, cont, zm, audit}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (audit->parsed()) return mp::command_audit(ledger_path, quiet);
        mp::RunConfig cfg = mp::parse_config(config_path);
        const std::string dir = output_dir.empty() ? cfg.output_dir : output_dir;
        if (run->parsed()) return mp::command_run(cfg, dir, quiet);
        if (cont->parsed()) return mp::command_continuation(cfg, dir, quiet);
        return mp::command_zero_mode(cfg, dir, quiet);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

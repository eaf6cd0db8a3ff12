#include "cellres/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_overrides(CLI::App* sub, cellres::Overrides& o, std::string& config)
{
    sub->add_option("config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--runs", o.runs, "number of Monte Carlo runs");
    sub->add_option("--p-iso", o.p_iso, "isolated failure probability per cell");
    sub->add_option("--r-fail", o.r_fail_m, "correlated failure radius in meters");
    sub->add_option("--p-pop", o.p_pop, "user surge in percent of the active population");
    sub->add_option("--mode", o.mode, "per-operator, roaming or both");
    sub->add_option("--out-dir", o.out_dir, "output directory (default ./out)");
    sub->add_option("--threads", o.threads, "worker threads, 0 = all cores (default CELLRES_THREADS)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cellular network resilience simulator"};
    app.set_version_flag("--version", std::string(CELLRES_VERSION));
    app.require_subcommand(1);

    cellres::Overrides overrides;
    std::string config;
    auto* run = app.add_subcommand("run", "Monte Carlo FDP/FSP under the configured scenario");
    auto* importance = app.add_subcommand("importance", "Single base station failure sweep");
    auto* coverage = app.add_subcommand("coverage", "Best-SINR rasters and ECDFs");
    for (auto* sub : {run, importance, coverage}) {
        add_overrides(sub, overrides, config);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cellres::kExitConfig;
    }

    cellres::Command command = cellres::Command::run;
    if (importance->parsed()) {
        command = cellres::Command::importance;
    } else if (coverage->parsed()) {
        command = cellres::Command::coverage;
    }
    return cellres::execute(command, config, overrides, std::cout, std::cerr);
}

#pragma once

#include "cellres/config.hpp"
#include "cellres/scenarios.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cellres {

struct LoadedInputs {
    Network network;
    std::vector<PopulationCell> population; // cells whose center is inside the region
    std::vector<std::string> warnings;
};

// Reads and validates every input named by the config. Any failure surfaces as
// IngestError. An empty network is an error unless allowed.
LoadedInputs load_inputs(const RunConfig& config, bool allow_empty_network = false);

struct Bundle {
    std::filesystem::path out_dir;
    std::vector<std::string> files; // names relative to out_dir, manifest last
    std::vector<std::string> warnings;
};

// results.json, fdp_fsp.csv, manifest.json
Bundle cmd_run(const RunConfig& config, const std::filesystem::path& out_dir, std::size_t threads);
// bs_importance.csv (plus bs_importance_roaming.csv in mode both), manifest.json
Bundle cmd_importance(const RunConfig& config, const std::filesystem::path& out_dir,
                      std::size_t threads);
// coverage_<label>.csv and ecdf_<label>.csv per series, coverage_summary.json, manifest.json
Bundle cmd_coverage(const RunConfig& config, const std::filesystem::path& out_dir,
                    std::size_t threads);

std::string sha256_hex(const std::filesystem::path& file);

enum class Command { run, importance, coverage };

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIngest = 3;
inline constexpr int kExitRuntime = 4;

// Loads the config, applies overrides, executes and maps failures to exit codes.
int execute(Command command, const std::filesystem::path& config_path, const Overrides& overrides,
            std::ostream& out, std::ostream& err);

} // namespace cellres

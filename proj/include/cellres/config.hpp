#pragma once

#include "cellres/geo.hpp"
#include "cellres/ingest.hpp"
#include "cellres/scenarios.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace cellres {

struct InputPaths {
    std::filesystem::path antennas;
    std::filesystem::path population;
    std::filesystem::path region;
    std::filesystem::path spectrum;
    RegionCrs region_crs = RegionCrs::planar;

    friend bool operator==(const InputPaths&, const InputPaths&) = default;
};

// Model constants in configuration units (rates in Mbps).
struct ModelConfig {
    double gamma_min_db = 5.0;
    double active_fraction = 0.02;
    double r_max_m = 5000.0;
    double rate_min_mbps = 8.0;
    double rate_max_mbps = 20.0;
    double noise_figure_db = 7.8;
    double thermal_noise_dbm_per_hz = -174.0;
    double ut_height_m = 1.5;
    double border_margin_m = 2000.0;
    std::size_t coordination_k = 3;
    bool shadowing = false;
    std::map<std::string, double> operator_split;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

ModelParams to_model_params(const ModelConfig& model);

struct RunConfig {
    InputPaths inputs;
    std::optional<Projection> projection;
    ModelConfig model;
    ScenarioSpec scenario;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws ConfigError listing every problem found. Relative input paths are kept as written.
RunConfig parse_config(std::string_view json_text);
std::string serialize_config(const RunConfig& config);

// Reads the file and resolves relative input paths against its directory.
RunConfig load_config(const std::filesystem::path& path);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<double> p_iso;
    std::optional<double> r_fail_m;
    std::optional<double> p_pop;
    std::optional<std::string> mode;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::size_t> threads; // 0 = auto; unset reads CELLRES_THREADS
};

// Throws ConfigError. --p-iso and --r-fail select the failure model and are exclusive.
RunConfig apply_overrides(RunConfig config, const Overrides& overrides);

} // namespace cellres

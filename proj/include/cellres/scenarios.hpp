#pragma once

#include "cellres/association.hpp"
#include "cellres/geo.hpp"
#include "cellres/ingest.hpp"
#include "cellres/metrics.hpp"
#include "cellres/radio.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cellres {

enum class ModeSelection { per_operator, roaming, both };

std::string_view to_string(ModeSelection mode);
std::optional<ModeSelection> parse_mode_selection(std::string_view text);

struct NoFailure {
    friend bool operator==(const NoFailure&, const NoFailure&) = default;
};
struct IsolatedFailure {
    double p_iso = 0.0;
    friend bool operator==(const IsolatedFailure&, const IsolatedFailure&) = default;
};
struct CorrelatedFailure {
    std::optional<Point> center; // nullopt: region centroid
    double r_fail_m = 0.0;
    friend bool operator==(const CorrelatedFailure&, const CorrelatedFailure&) = default;
};
struct SingleBsSweep {
    friend bool operator==(const SingleBsSweep&, const SingleBsSweep&) = default;
};

using FailureSpec = std::variant<NoFailure, IsolatedFailure, CorrelatedFailure, SingleBsSweep>;

struct ScenarioSpec {
    ModeSelection mode = ModeSelection::both;
    FailureSpec failure = NoFailure{};
    double p_pop = 0.0;
    std::size_t runs = 100;
    std::uint64_t seed = 1;
    std::string region_id = "region";

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

void validate(const ScenarioSpec& spec);

struct ModelParams {
    double gamma_min_db = 5.0;
    double active_fraction = 0.02;
    double rate_min_bps = 8e6;
    double rate_max_bps = 20e6;
    double border_margin_m = 2000.0;
    RadioParams radio;
    // Operator name -> share of users. Empty means an equal split.
    std::map<std::string, double> operator_split;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

void validate(const ModelParams& model);

// Cells selected for one region, sorted by strictly increasing id.
struct Network {
    std::vector<Cell> cells;
    Region region;
    std::vector<std::string> operator_names;

    std::size_t in_region_count() const noexcept;
};

void validate(const Network& network);

// Each cell fails independently with probability p_iso. Draws are keyed by cell id.
std::vector<bool> apply_isolated_failures(std::span<const Cell> cells, std::vector<bool> active,
                                          double p_iso, std::uint64_t seed);

// Cells within r_fail of the center (inclusive) fail.
std::vector<bool> apply_correlated_failure(std::span<const Cell> cells, std::vector<bool> active,
                                           Point center, double r_fail_m);

struct RunSeeds {
    std::uint64_t users = 0;
    std::uint64_t surge = 0;
    std::uint64_t los = 0;
    std::uint64_t shadowing = 0;
    std::uint64_t assoc_order = 0;
    std::uint64_t failures = 0;
};

RunSeeds run_seeds(std::uint64_t seed, std::size_t run);

// A (mode, operator) series. For per-operator mode the operator is the network owner
// and the users are its subscribers; roaming has no operator and covers everyone.
struct SeriesKey {
    AssociationMode mode = AssociationMode::roaming;
    std::optional<OperatorId> op;

    friend auto operator<=>(const SeriesKey&, const SeriesKey&) = default;
};

std::vector<SeriesKey> series_for(ModeSelection mode, std::size_t operator_count);

struct SeriesMetrics {
    SeriesKey key;
    MetricsReport report;
};

struct RunResult {
    std::size_t run = 0;
    RunSeeds seeds;
    std::size_t user_count = 0;
    std::size_t failed_cells = 0;
    std::vector<SeriesMetrics> series;
};

struct Aggregate {
    SeriesKey key;
    std::size_t runs = 0;
    double fdp_mean = 0.0;
    double fdp_std = 0.0;
    double fsp_mean = 0.0;
    double fsp_std = 0.0;
};

struct ScenarioResult {
    std::vector<RunResult> runs;
    std::vector<Aggregate> aggregates;
    std::vector<std::string> warnings;
};

// Mean and sample standard deviation per series, accumulated in run order.
std::vector<Aggregate> aggregate(std::span<const RunResult> runs);

// Users for one run: sampled population plus the surge.
UserSet run_users(const ScenarioSpec& spec, std::span<const PopulationCell> population,
                  const ModelParams& model, const Network& network, const RunSeeds& seeds);

// Active mask after the scenario's failure model for one run.
std::vector<bool> run_active_cells(const ScenarioSpec& spec, const Network& network,
                                   const RunSeeds& seeds);

RunResult run_once(const ScenarioSpec& spec, const Network& network,
                   std::span<const PopulationCell> population, const ModelParams& model,
                   std::size_t run);

// Throws ValidationError for an empty network. Runs execute on up to `threads` workers;
// results do not depend on the worker count.
ScenarioResult run_scenario(const ScenarioSpec& spec, const Network& network,
                            std::span<const PopulationCell> population, const ModelParams& model,
                            std::size_t threads = 1);

struct ImportanceRow {
    CellId cell;
    std::string site_id;
    OperatorId op;
    double delta_fdp = 0.0;
    double delta_fsp = 0.0;
};

struct ImportanceTable {
    AssociationMode mode = AssociationMode::single_operator;
    std::vector<ImportanceRow> rows; // sorted by delta_fsp descending, then cell id
};

// Single-cell failure sweep over every in-region cell, averaged over runs. Per-operator
// deltas are measured on the cell owner's subscribers, roaming deltas on all users.
std::vector<ImportanceTable> importance_sweep(const Network& network,
                                              std::span<const PopulationCell> population,
                                              const ScenarioSpec& spec, const ModelParams& model,
                                              std::size_t threads = 1);

} // namespace cellres

#include "cellres/scenarios.hpp"

#include "cellres/errors.hpp"
#include "cellres/parallel.hpp"
#include "cellres/seeding.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace cellres {

std::string_view to_string(ModeSelection mode)
{
    switch (mode) {
    case ModeSelection::per_operator: return "per-operator";
    case ModeSelection::roaming: return "roaming";
    case ModeSelection::both: return "both";
    }
    return "?";
}

std::optional<ModeSelection> parse_mode_selection(std::string_view text)
{
    if (text == "per-operator") return ModeSelection::per_operator;
    if (text == "roaming") return ModeSelection::roaming;
    if (text == "both") return ModeSelection::both;
    return std::nullopt;
}

void validate(const ScenarioSpec& spec)
{
    if (spec.runs < 1) {
        throw ValidationError("runs must be >= 1");
    }
    if (!(spec.p_pop >= 0.0) || !std::isfinite(spec.p_pop)) {
        throw ValidationError(fmt::format("p_pop {} must be >= 0", spec.p_pop));
    }
    if (const auto* iso = std::get_if<IsolatedFailure>(&spec.failure)) {
        if (!(iso->p_iso >= 0.0 && iso->p_iso <= 1.0)) {
            throw ValidationError(fmt::format("p_iso {} outside [0, 1]", iso->p_iso));
        }
    }
    if (const auto* cor = std::get_if<CorrelatedFailure>(&spec.failure)) {
        if (!(cor->r_fail_m >= 0.0) || !std::isfinite(cor->r_fail_m)) {
            throw ValidationError(fmt::format("r_fail {} must be >= 0", cor->r_fail_m));
        }
    }
}

void validate(const ModelParams& model)
{
    if (!std::isfinite(model.gamma_min_db)) {
        throw ValidationError("gamma_min must be finite");
    }
    if (!(model.active_fraction >= 0.0 && model.active_fraction <= 1.0)) {
        throw ValidationError(fmt::format("active fraction {} outside [0, 1]", model.active_fraction));
    }
    if (!(model.rate_min_bps >= 0.0) || !(model.rate_min_bps <= model.rate_max_bps)) {
        throw ValidationError("rate band must satisfy 0 <= R_min <= R_max");
    }
    if (!(model.radio.r_max_m > 0.0)) {
        throw ValidationError("r_max must be positive");
    }
    if (!(model.border_margin_m >= 0.0)) {
        throw ValidationError("border margin must be >= 0");
    }
    if (!(model.radio.ut_height_m > 0.0)) {
        throw ValidationError("UT height must be positive");
    }
    model.radio.noise.power_w(1.0);
}

std::size_t Network::in_region_count() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return c.in_region; }));
}

void validate(const Network& network)
{
    if (network.cells.empty()) {
        throw ValidationError("network has no cells");
    }
    for (std::size_t i = 0; i < network.cells.size(); ++i) {
        if (i > 0 && !(network.cells[i - 1].id < network.cells[i].id)) {
            throw ValidationError("network cells must be sorted by strictly increasing id");
        }
        if (network.cells[i].operator_id.value >= network.operator_names.size()) {
            throw ValidationError(
                fmt::format("cell {} has an unknown operator", network.cells[i].id.value));
        }
    }
}

std::vector<bool> apply_isolated_failures(std::span<const Cell> cells, std::vector<bool> active,
                                          double p_iso, std::uint64_t seed)
{
    if (!(p_iso >= 0.0 && p_iso <= 1.0)) {
        throw ValidationError(fmt::format("p_iso {} outside [0, 1]", p_iso));
    }
    if (active.size() != cells.size()) {
        throw ValidationError("active mask must have one entry per cell");
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if (hashed_uniform(seed, cells[j].id.value, 0) < p_iso) {
            active[j] = false;
        }
    }
    return active;
}

std::vector<bool> apply_correlated_failure(std::span<const Cell> cells, std::vector<bool> active,
                                           Point center, double r_fail_m)
{
    if (!(r_fail_m >= 0.0)) {
        throw ValidationError(fmt::format("r_fail {} must be >= 0", r_fail_m));
    }
    if (active.size() != cells.size()) {
        throw ValidationError("active mask must have one entry per cell");
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if (distance(cells[j].position, center) <= r_fail_m) {
            active[j] = false;
        }
    }
    return active;
}

RunSeeds run_seeds(std::uint64_t seed, std::size_t run)
{
    RunSeeds s;
    s.users = derive_seed(seed, run, Stream::users);
    s.surge = derive_seed(seed, run, Stream::surge);
    s.los = derive_seed(seed, run, Stream::los);
    s.shadowing = derive_seed(seed, run, Stream::shadowing);
    s.assoc_order = derive_seed(seed, run, Stream::assoc_order);
    s.failures = derive_seed(seed, run, Stream::failures);
    return s;
}

std::vector<SeriesKey> series_for(ModeSelection mode, std::size_t operator_count)
{
    std::vector<SeriesKey> keys;
    if (mode != ModeSelection::roaming) {
        for (std::size_t k = 0; k < operator_count; ++k) {
            keys.push_back({AssociationMode::single_operator, OperatorId{static_cast<std::uint16_t>(k)}});
        }
    }
    if (mode != ModeSelection::per_operator) {
        keys.push_back({AssociationMode::roaming, std::nullopt});
    }
    return keys;
}

std::vector<Aggregate> aggregate(std::span<const RunResult> runs)
{
    std::vector<Aggregate> out;
    if (runs.empty()) {
        return out;
    }
    for (std::size_t s = 0; s < runs.front().series.size(); ++s) {
        Aggregate a;
        a.key = runs.front().series[s].key;
        a.runs = runs.size();
        double fdp_sum = 0.0;
        double fsp_sum = 0.0;
        for (const auto& r : runs) {
            fdp_sum += r.series.at(s).report.fdp;
            fsp_sum += r.series.at(s).report.fsp;
        }
        const double n = static_cast<double>(runs.size());
        a.fdp_mean = fdp_sum / n;
        a.fsp_mean = fsp_sum / n;
        if (runs.size() > 1) {
            double fdp_ss = 0.0;
            double fsp_ss = 0.0;
            for (const auto& r : runs) {
                const double dd = r.series[s].report.fdp - a.fdp_mean;
                const double ds = r.series[s].report.fsp - a.fsp_mean;
                fdp_ss += dd * dd;
                fsp_ss += ds * ds;
            }
            a.fdp_std = std::sqrt(fdp_ss / (n - 1.0));
            a.fsp_std = std::sqrt(fsp_ss / (n - 1.0));
        }
        out.push_back(a);
    }
    return out;
}

namespace {

SamplingParams sampling_params(const ModelParams& model, const Network& network)
{
    std::vector<OperatorId> ops;
    for (std::size_t k = 0; k < network.operator_names.size(); ++k) {
        ops.push_back(OperatorId{static_cast<std::uint16_t>(k)});
    }
    auto params = SamplingParams::equal_split(std::move(ops), model.active_fraction,
                                              model.rate_min_bps, model.rate_max_bps);
    if (!model.operator_split.empty()) {
        for (const auto& [name, share] : model.operator_split) {
            if (std::find(network.operator_names.begin(), network.operator_names.end(), name) ==
                network.operator_names.end()) {
                throw ValidationError(fmt::format("operator split names unknown operator '{}'", name));
            }
        }
        for (std::size_t k = 0; k < network.operator_names.size(); ++k) {
            const auto it = model.operator_split.find(network.operator_names[k]);
            params.split[k] = it == model.operator_split.end() ? 0.0 : it->second;
        }
    }
    return params;
}

std::vector<User> users_for(const SeriesKey& key, std::span<const User> users)
{
    if (!key.op) {
        return {users.begin(), users.end()};
    }
    std::vector<User> out;
    for (const User& u : users) {
        if (u.subscription == key.op) {
            out.push_back(u);
        }
    }
    return out;
}

} // namespace

UserSet run_users(const ScenarioSpec& spec, std::span<const PopulationCell> population,
                  const ModelParams& model, const Network& network, const RunSeeds& seeds)
{
    const auto params = sampling_params(model, network);
    UserSet users = sample_users(population, params, seeds.users);
    if (spec.p_pop > 0.0) {
        users = scale_users(users, population, params, spec.p_pop, seeds.surge);
    }
    return users;
}

std::vector<bool> run_active_cells(const ScenarioSpec& spec, const Network& network,
                                   const RunSeeds& seeds)
{
    std::vector<bool> active(network.cells.size(), true);
    if (const auto* iso = std::get_if<IsolatedFailure>(&spec.failure)) {
        active = apply_isolated_failures(network.cells, std::move(active), iso->p_iso, seeds.failures);
    } else if (const auto* cor = std::get_if<CorrelatedFailure>(&spec.failure)) {
        const Point center = cor->center.value_or(network.region.centroid());
        active = apply_correlated_failure(network.cells, std::move(active), center, cor->r_fail_m);
    }
    return active;
}

RunResult run_once(const ScenarioSpec& spec, const Network& network,
                   std::span<const PopulationCell> population, const ModelParams& model,
                   std::size_t run)
{
    RunResult result;
    result.run = run;
    result.seeds = run_seeds(spec.seed, run);
    const UserSet users = run_users(spec, population, model, network, result.seeds);
    auto active = run_active_cells(spec, network, result.seeds);
    result.user_count = users.size();
    result.failed_cells = static_cast<std::size_t>(std::count(active.begin(), active.end(), false));

    const RadioEnvironment radio(network.cells, std::move(active), model.radio, result.seeds.los,
                                 result.seeds.shadowing);
    for (const auto& key : series_for(spec.mode, network.operator_names.size())) {
        const auto subset = users_for(key, users.users);
        result.series.push_back({key, evaluate_network(radio, subset, key.mode, model.gamma_min_db,
                                                       result.seeds.assoc_order)});
    }
    return result;
}

ScenarioResult run_scenario(const ScenarioSpec& spec, const Network& network,
                            std::span<const PopulationCell> population, const ModelParams& model,
                            std::size_t threads)
{
    validate(spec);
    validate(model);
    validate(network);
    if (std::holds_alternative<SingleBsSweep>(spec.failure)) {
        throw ValidationError("single-BS sweeps run through importance_sweep");
    }
    ScenarioResult result;
    double total_population = 0.0;
    for (const auto& c : population) {
        total_population += c.population;
    }
    if (total_population <= 0.0) {
        result.warnings.emplace_back("region has no population: FDP and FSP are degenerate (0)");
    }
    result.runs.resize(spec.runs);
    parallel_for(spec.runs, threads, [&](std::size_t r) {
        result.runs[r] = run_once(spec, network, population, model, r);
    });
    result.aggregates = aggregate(result.runs);
    return result;
}

std::vector<ImportanceTable> importance_sweep(const Network& network,
                                              std::span<const PopulationCell> population,
                                              const ScenarioSpec& spec, const ModelParams& model,
                                              std::size_t threads)
{
    validate(spec);
    validate(model);
    validate(network);
    ScenarioSpec base = spec;
    base.failure = NoFailure{};

    const auto keys = series_for(spec.mode, network.operator_names.size());
    std::vector<std::uint32_t> targets;
    for (std::uint32_t j = 0; j < network.cells.size(); ++j) {
        if (network.cells[j].in_region) {
            targets.push_back(j);
        }
    }
    // sums[key][target]
    std::vector<std::vector<ImportanceDelta>> sums(keys.size(),
                                                   std::vector<ImportanceDelta>(targets.size()));

    for (std::size_t r = 0; r < spec.runs; ++r) {
        const auto seeds = run_seeds(spec.seed, r);
        const UserSet users = run_users(base, population, model, network, seeds);
        const RadioEnvironment radio(network.cells, std::vector<bool>(network.cells.size(), true),
                                     model.radio, seeds.los, seeds.shadowing);
        std::vector<std::vector<User>> subsets;
        std::vector<MetricsReport> baselines;
        for (const auto& key : keys) {
            subsets.push_back(users_for(key, users.users));
            baselines.push_back(evaluate_network(radio, subsets.back(), key.mode,
                                                 model.gamma_min_db, seeds.assoc_order));
        }
        parallel_for(targets.size(), threads, [&](std::size_t t) {
            const Cell& cell = network.cells[targets[t]];
            for (std::size_t k = 0; k < keys.size(); ++k) {
                if (keys[k].op && *keys[k].op != cell.operator_id) {
                    continue;
                }
                const auto d = bs_importance(radio, subsets[k], keys[k].mode, model.gamma_min_db,
                                             seeds.assoc_order, baselines[k], cell.id);
                sums[k][t].delta_fdp += d.delta_fdp;
                sums[k][t].delta_fsp += d.delta_fsp;
            }
        });
    }

    std::vector<ImportanceTable> tables;
    const double n = static_cast<double>(spec.runs);
    for (AssociationMode mode : {AssociationMode::single_operator, AssociationMode::roaming}) {
        ImportanceTable table;
        table.mode = mode;
        bool present = false;
        for (std::size_t k = 0; k < keys.size(); ++k) {
            if (keys[k].mode != mode) {
                continue;
            }
            present = true;
            for (std::size_t t = 0; t < targets.size(); ++t) {
                const Cell& cell = network.cells[targets[t]];
                if (keys[k].op && *keys[k].op != cell.operator_id) {
                    continue;
                }
                table.rows.push_back({cell.id, cell.site_id, cell.operator_id,
                                      sums[k][t].delta_fdp / n, sums[k][t].delta_fsp / n});
            }
        }
        if (!present) {
            continue;
        }
        std::sort(table.rows.begin(), table.rows.end(),
                  [](const ImportanceRow& a, const ImportanceRow& b) {
                      return a.delta_fsp != b.delta_fsp ? a.delta_fsp > b.delta_fsp : a.cell < b.cell;
                  });
        tables.push_back(std::move(table));
    }
    return tables;
}

} // namespace cellres

#include "cellres/config.hpp"

#include "cellres/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

namespace cellres {

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error(diagnostics.empty() ? std::string("invalid configuration")
                                             : "invalid configuration: " + diagnostics.front()),
      diagnostics_(std::move(diagnostics))
{
}

ModelParams to_model_params(const ModelConfig& model)
{
    ModelParams p;
    p.gamma_min_db = model.gamma_min_db;
    p.active_fraction = model.active_fraction;
    p.rate_min_bps = model.rate_min_mbps * 1e6;
    p.rate_max_bps = model.rate_max_mbps * 1e6;
    p.border_margin_m = model.border_margin_m;
    p.radio.noise.noise_figure_db = model.noise_figure_db;
    p.radio.noise.thermal_density_dbm_per_hz = model.thermal_noise_dbm_per_hz;
    p.radio.ut_height_m = model.ut_height_m;
    p.radio.r_max_m = model.r_max_m;
    p.radio.coordination_k = model.coordination_k;
    p.radio.shadowing = model.shadowing;
    p.operator_split = model.operator_split;
    return p;
}

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Walks a JSON object, recording problems instead of stopping at the first.
class Reader {
public:
    explicit Reader(std::vector<std::string>& diags) : diags_(diags) {}

    const json* object(const json& parent, const std::string& path, const std::string& key,
                       bool required)
    {
        const json* v = find(parent, path, key, required);
        if (v && !v->is_object()) {
            diags_.push_back(fmt::format("{}: expected an object", join(path, key)));
            return nullptr;
        }
        return v;
    }

    void number(const json& parent, const std::string& path, const std::string& key, double& out)
    {
        if (const json* v = find(parent, path, key, false)) {
            if (v->is_number()) {
                out = v->get<double>();
            } else {
                diags_.push_back(fmt::format("{}: expected a number", join(path, key)));
            }
        }
    }

    template <class Int>
    void integer(const json& parent, const std::string& path, const std::string& key, Int& out)
    {
        if (const json* v = find(parent, path, key, false)) {
            if (v->is_number_unsigned()) {
                out = v->get<Int>();
            } else if (v->is_number_integer()) {
                diags_.push_back(fmt::format("{}: must be >= 0", join(path, key)));
            } else {
                diags_.push_back(fmt::format("{}: expected a non-negative integer", join(path, key)));
            }
        }
    }

    void boolean(const json& parent, const std::string& path, const std::string& key, bool& out)
    {
        if (const json* v = find(parent, path, key, false)) {
            if (v->is_boolean()) {
                out = v->get<bool>();
            } else {
                diags_.push_back(fmt::format("{}: expected true or false", join(path, key)));
            }
        }
    }

    bool string(const json& parent, const std::string& path, const std::string& key,
                std::string& out, bool required)
    {
        if (const json* v = find(parent, path, key, required)) {
            if (v->is_string()) {
                out = v->get<std::string>();
                return true;
            }
            diags_.push_back(fmt::format("{}: expected a string", join(path, key)));
        }
        return false;
    }

    void unknown_keys(const json& obj, const std::string& path, std::set<std::string> known)
    {
        for (const auto& [k, v] : obj.items()) {
            if (!known.count(k)) {
                diags_.push_back(fmt::format("{}: unknown key", join(path, k)));
            }
        }
    }

    static std::string join(const std::string& path, const std::string& key)
    {
        return path.empty() ? key : path + "." + key;
    }

private:
    const json* find(const json& parent, const std::string& path, const std::string& key,
                     bool required)
    {
        const auto it = parent.find(key);
        if (it == parent.end()) {
            if (required) {
                diags_.push_back(fmt::format("{}: required key missing", join(path, key)));
            }
            return nullptr;
        }
        return &*it;
    }

    std::vector<std::string>& diags_;
};

void read_inputs(Reader& rd, const json& obj, InputPaths& in, std::vector<std::string>& diags)
{
    rd.unknown_keys(obj, "inputs", {"antennas", "population", "region", "spectrum", "region_crs"});
    std::string s;
    if (rd.string(obj, "inputs", "antennas", s, true)) in.antennas = s;
    if (rd.string(obj, "inputs", "population", s, true)) in.population = s;
    if (rd.string(obj, "inputs", "region", s, true)) in.region = s;
    if (rd.string(obj, "inputs", "spectrum", s, true)) in.spectrum = s;
    if (rd.string(obj, "inputs", "region_crs", s, false)) {
        if (s == "planar") {
            in.region_crs = RegionCrs::planar;
        } else if (s == "geographic") {
            in.region_crs = RegionCrs::geographic;
        } else {
            diags.push_back(fmt::format("inputs.region_crs: '{}' is not planar or geographic", s));
        }
    }
}

void read_model(Reader& rd, const json& obj, ModelConfig& m, std::vector<std::string>& diags)
{
    rd.unknown_keys(obj, "model",
                    {"gamma_min_db", "active_fraction", "r_max_m", "rate_min_mbps", "rate_max_mbps",
                     "noise_figure_db", "thermal_noise_dbm_per_hz", "ut_height_m",
                     "border_margin_m", "coordination_k", "shadowing", "operator_split"});
    rd.number(obj, "model", "gamma_min_db", m.gamma_min_db);
    rd.number(obj, "model", "active_fraction", m.active_fraction);
    rd.number(obj, "model", "r_max_m", m.r_max_m);
    rd.number(obj, "model", "rate_min_mbps", m.rate_min_mbps);
    rd.number(obj, "model", "rate_max_mbps", m.rate_max_mbps);
    rd.number(obj, "model", "noise_figure_db", m.noise_figure_db);
    rd.number(obj, "model", "thermal_noise_dbm_per_hz", m.thermal_noise_dbm_per_hz);
    rd.number(obj, "model", "ut_height_m", m.ut_height_m);
    rd.number(obj, "model", "border_margin_m", m.border_margin_m);
    rd.integer(obj, "model", "coordination_k", m.coordination_k);
    rd.boolean(obj, "model", "shadowing", m.shadowing);
    if (const json* split = rd.object(obj, "model", "operator_split", false)) {
        for (const auto& [name, share] : split->items()) {
            if (share.is_number()) {
                m.operator_split[name] = share.get<double>();
            } else {
                diags.push_back(fmt::format("model.operator_split.{}: expected a number", name));
            }
        }
    }
}

void read_failure(Reader& rd, const json& obj, FailureSpec& failure, std::vector<std::string>& diags)
{
    const std::string path = "scenario.failure";
    std::string type;
    if (!rd.string(obj, path, "type", type, true)) {
        return;
    }
    if (type == "none") {
        rd.unknown_keys(obj, path, {"type"});
        failure = NoFailure{};
    } else if (type == "sweep") {
        rd.unknown_keys(obj, path, {"type"});
        failure = SingleBsSweep{};
    } else if (type == "isolated") {
        rd.unknown_keys(obj, path, {"type", "p_iso"});
        IsolatedFailure f;
        if (!obj.contains("p_iso")) {
            diags.push_back(path + ".p_iso: required key missing");
        }
        rd.number(obj, path, "p_iso", f.p_iso);
        failure = f;
    } else if (type == "correlated") {
        rd.unknown_keys(obj, path, {"type", "r_fail_m", "center"});
        CorrelatedFailure f;
        if (!obj.contains("r_fail_m")) {
            diags.push_back(path + ".r_fail_m: required key missing");
        }
        rd.number(obj, path, "r_fail_m", f.r_fail_m);
        if (const auto it = obj.find("center"); it != obj.end()) {
            if (it->is_string() && it->get<std::string>() == "centroid") {
                f.center.reset();
            } else if (it->is_array() && it->size() == 2 && (*it)[0].is_number() &&
                       (*it)[1].is_number()) {
                f.center = Point{(*it)[0].get<double>(), (*it)[1].get<double>()};
            } else {
                diags.push_back(path + ".center: expected \"centroid\" or [x_m, y_m]");
            }
        }
        failure = f;
    } else {
        diags.push_back(fmt::format("{}.type: '{}' is not none, isolated, correlated or sweep", path,
                                    type));
    }
}

void read_scenario(Reader& rd, const json& obj, ScenarioSpec& spec, std::vector<std::string>& diags)
{
    rd.unknown_keys(obj, "scenario", {"mode", "failure", "p_pop", "runs", "seed", "region_id"});
    std::string s;
    if (rd.string(obj, "scenario", "mode", s, false)) {
        if (const auto m = parse_mode_selection(s)) {
            spec.mode = *m;
        } else {
            diags.push_back(fmt::format("scenario.mode: '{}' is not per-operator, roaming or both", s));
        }
    }
    if (const json* f = rd.object(obj, "scenario", "failure", false)) {
        read_failure(rd, *f, spec.failure, diags);
    }
    rd.number(obj, "scenario", "p_pop", spec.p_pop);
    rd.integer(obj, "scenario", "runs", spec.runs);
    rd.integer(obj, "scenario", "seed", spec.seed);
    rd.string(obj, "scenario", "region_id", spec.region_id, false);
}

void read_projection(Reader& rd, const json& obj, Projection& p)
{
    rd.unknown_keys(obj, "projection",
                    {"origin_lat", "origin_lon", "false_easting_m", "false_northing_m"});
    rd.number(obj, "projection", "origin_lat", p.origin_lat_deg);
    rd.number(obj, "projection", "origin_lon", p.origin_lon_deg);
    rd.number(obj, "projection", "false_easting_m", p.false_easting_m);
    rd.number(obj, "projection", "false_northing_m", p.false_northing_m);
}

void check_values(const RunConfig& cfg, std::vector<std::string>& diags)
{
    try {
        validate(cfg.scenario);
    } catch (const ValidationError& e) {
        diags.push_back(fmt::format("scenario: {}", e.what()));
    }
    try {
        validate(to_model_params(cfg.model));
    } catch (const std::exception& e) {
        diags.push_back(fmt::format("model: {}", e.what()));
    }
    if (!cfg.model.operator_split.empty()) {
        double total = 0.0;
        for (const auto& [name, share] : cfg.model.operator_split) {
            if (!(share >= 0.0)) {
                diags.push_back(fmt::format("model.operator_split.{}: must be >= 0", name));
            }
            total += share;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            diags.push_back(fmt::format("model.operator_split: shares sum to {}, not 1", total));
        }
    }
    if (cfg.projection) {
        const auto& p = *cfg.projection;
        if (!(std::abs(p.origin_lat_deg) < 90.0) || !(std::abs(p.origin_lon_deg) <= 180.0)) {
            diags.push_back("projection: origin outside valid latitude/longitude");
        }
    }
}

ojson failure_json(const FailureSpec& failure)
{
    ojson f;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NoFailure>) {
                f["type"] = "none";
            } else if constexpr (std::is_same_v<T, SingleBsSweep>) {
                f["type"] = "sweep";
            } else if constexpr (std::is_same_v<T, IsolatedFailure>) {
                f["type"] = "isolated";
                f["p_iso"] = v.p_iso;
            } else {
                f["type"] = "correlated";
                f["r_fail_m"] = v.r_fail_m;
                if (v.center) {
                    f["center"] = ojson::array({v.center->x, v.center->y});
                } else {
                    f["center"] = "centroid";
                }
            }
        },
        failure);
    return f;
}

} // namespace

RunConfig parse_config(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({fmt::format("not valid JSON: {}", e.what())});
    }
    std::vector<std::string> diags;
    if (!doc.is_object()) {
        throw ConfigError({"top level must be a JSON object"});
    }
    Reader rd(diags);
    RunConfig cfg;
    rd.unknown_keys(doc, "", {"inputs", "projection", "model", "scenario"});
    if (const json* in = rd.object(doc, "", "inputs", true)) {
        read_inputs(rd, *in, cfg.inputs, diags);
    }
    if (const json* p = rd.object(doc, "", "projection", false)) {
        Projection proj;
        read_projection(rd, *p, proj);
        cfg.projection = proj;
    }
    if (const json* m = rd.object(doc, "", "model", false)) {
        read_model(rd, *m, cfg.model, diags);
    }
    if (const json* s = rd.object(doc, "", "scenario", false)) {
        read_scenario(rd, *s, cfg.scenario, diags);
    }
    if (diags.empty()) {
        check_values(cfg, diags);
    }
    if (!diags.empty()) {
        throw ConfigError(std::move(diags));
    }
    return cfg;
}

std::string serialize_config(const RunConfig& cfg)
{
    ojson doc;
    doc["inputs"] = {{"antennas", cfg.inputs.antennas.generic_string()},
                     {"population", cfg.inputs.population.generic_string()},
                     {"region", cfg.inputs.region.generic_string()},
                     {"spectrum", cfg.inputs.spectrum.generic_string()},
                     {"region_crs",
                      cfg.inputs.region_crs == RegionCrs::planar ? "planar" : "geographic"}};
    if (cfg.projection) {
        doc["projection"] = {{"origin_lat", cfg.projection->origin_lat_deg},
                             {"origin_lon", cfg.projection->origin_lon_deg},
                             {"false_easting_m", cfg.projection->false_easting_m},
                             {"false_northing_m", cfg.projection->false_northing_m}};
    }
    const auto& m = cfg.model;
    ojson model = {{"gamma_min_db", m.gamma_min_db},
                   {"active_fraction", m.active_fraction},
                   {"r_max_m", m.r_max_m},
                   {"rate_min_mbps", m.rate_min_mbps},
                   {"rate_max_mbps", m.rate_max_mbps},
                   {"noise_figure_db", m.noise_figure_db},
                   {"thermal_noise_dbm_per_hz", m.thermal_noise_dbm_per_hz},
                   {"ut_height_m", m.ut_height_m},
                   {"border_margin_m", m.border_margin_m},
                   {"coordination_k", m.coordination_k},
                   {"shadowing", m.shadowing}};
    if (!m.operator_split.empty()) {
        ojson split = ojson::object();
        for (const auto& [name, share] : m.operator_split) {
            split[name] = share;
        }
        model["operator_split"] = split;
    }
    doc["model"] = model;
    const auto& s = cfg.scenario;
    doc["scenario"] = {{"mode", std::string(to_string(s.mode))},
                       {"failure", failure_json(s.failure)},
                       {"p_pop", s.p_pop},
                       {"runs", s.runs},
                       {"seed", s.seed},
                       {"region_id", s.region_id}};
    return doc.dump(2) + "\n";
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError({fmt::format("cannot open config file {}", path.string())});
    }
    std::ostringstream text;
    text << in.rdbuf();
    RunConfig cfg = parse_config(text.str());
    const auto base = std::filesystem::absolute(path).parent_path();
    for (auto* p : {&cfg.inputs.antennas, &cfg.inputs.population, &cfg.inputs.region,
                    &cfg.inputs.spectrum}) {
        if (p->is_relative()) {
            *p = (base / *p).lexically_normal();
        }
    }
    return cfg;
}

RunConfig apply_overrides(RunConfig config, const Overrides& o)
{
    std::vector<std::string> diags;
    if (o.seed) config.scenario.seed = *o.seed;
    if (o.runs) config.scenario.runs = *o.runs;
    if (o.p_pop) config.scenario.p_pop = *o.p_pop;
    if (o.mode) {
        if (const auto m = parse_mode_selection(*o.mode)) {
            config.scenario.mode = *m;
        } else {
            diags.push_back(fmt::format("--mode: '{}' is not per-operator, roaming or both", *o.mode));
        }
    }
    if (o.p_iso && o.r_fail_m) {
        diags.push_back("--p-iso and --r-fail cannot be combined");
    } else if (o.p_iso) {
        config.scenario.failure = IsolatedFailure{*o.p_iso};
    } else if (o.r_fail_m) {
        CorrelatedFailure f;
        if (const auto* cur = std::get_if<CorrelatedFailure>(&config.scenario.failure)) {
            f.center = cur->center;
        }
        f.r_fail_m = *o.r_fail_m;
        config.scenario.failure = f;
    }
    if (diags.empty()) {
        check_values(config, diags);
    }
    if (!diags.empty()) {
        throw ConfigError(std::move(diags));
    }
    return config;
}

} // namespace cellres

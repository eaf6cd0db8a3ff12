#include "cellres/commands.hpp"

#include "cellres/errors.hpp"
#include "cellres/parallel.hpp"
#include "cellres/seeding.hpp"

#include <array>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/core.h>
#include <json.hpp>
#include <openssl/evp.h>

#ifndef CELLRES_VERSION
#define CELLRES_VERSION "unknown"
#endif

namespace cellres {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestError(fmt::format("cannot open {}", path.string()));
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

LoadedInputs load_inputs_unchecked(const RunConfig& cfg, bool allow_empty)
{
    std::vector<std::string> warnings;
    const auto spectrum = load_spectrum(cfg.inputs.spectrum);
    const auto grid = load_population(cfg.inputs.population);

    std::optional<Projection> projection = cfg.projection;
    if (!projection && cfg.inputs.region_crs == RegionCrs::geographic) {
        projection = projection_at_geojson_centroid(read_text(cfg.inputs.region));
    }
    Region region = load_region(cfg.inputs.region, cfg.scenario.region_id, cfg.inputs.region_crs,
                                projection);

    auto parsed = parse_antenna_csv(cfg.inputs.antennas);
    for (const auto& e : parsed.errors) {
        warnings.push_back(fmt::format("antennas line {}: {}", e.line, e.message));
    }
    auto filtered = filter_records(std::move(parsed.records));
    if (filtered.report.removed_2g > 0 || filtered.report.removed_omni > 0) {
        warnings.push_back(fmt::format("dropped {} 2G and {} omnidirectional antenna rows",
                                           filtered.report.removed_2g,
                                           filtered.report.removed_omni));
    }
    auto built = build_cells(filtered.records, spectrum, grid, projection);
    for (const auto& q : built.quarantined) {
        warnings.push_back(fmt::format("antennas line {} quarantined: {}", q.line, q.message));
    }
    for (auto& w : built.warnings) {
        warnings.push_back(std::move(w));
    }
    auto cells = select_cells_for_region(std::move(built.cells), region, cfg.model.border_margin_m);
    if (cells.empty() && !allow_empty) {
        throw IngestError(fmt::format("no antenna within {} m of region '{}'",
                                      cfg.model.border_margin_m, region.id()));
    }
    auto population = grid.within(region);
    return LoadedInputs{Network{std::move(cells), std::move(region), spectrum.names()},
                        std::move(population), std::move(warnings)};
}

std::string num(double v) { return fmt::format("{}", v); }

std::string operator_label(const Network& network, const SeriesKey& key)
{
    return key.op ? network.operator_names.at(key.op->value) : std::string("all");
}

std::string file_label(std::string_view name)
{
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    return out;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') {
            q.push_back('"');
        }
        q.push_back(c);
    }
    q.push_back('"');
    return q;
}

class BundleWriter {
public:
    BundleWriter(fs::path dir, const RunConfig& cfg, std::string command)
        : cfg_(cfg), command_(std::move(command))
    {
        bundle_.out_dir = std::move(dir);
        std::error_code ec;
        fs::create_directories(bundle_.out_dir, ec);
        if (ec) {
            throw std::runtime_error(
                fmt::format("cannot create {}: {}", bundle_.out_dir.string(), ec.message()));
        }
    }

    void write(const std::string& name, const std::string& content)
    {
        const auto path = bundle_.out_dir / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << content;
        f.close();
        if (!f) {
            throw std::runtime_error(fmt::format("cannot write {}", path.string()));
        }
        bundle_.files.push_back(name);
    }

    void add_warnings(const std::vector<std::string>& w)
    {
        bundle_.warnings.insert(bundle_.warnings.end(), w.begin(), w.end());
    }

    Bundle finish(ojson seeds)
    {
        ojson m;
        m["tool"] = "cellres";
        m["version"] = CELLRES_VERSION;
        m["command"] = command_;
        m["config"] = ojson::parse(serialize_config(cfg_));
        ojson inputs = ojson::array();
        for (const auto& [role, path] : {std::pair<const char*, const fs::path*>{"antennas", &cfg_.inputs.antennas},
                                         {"population", &cfg_.inputs.population},
                                         {"region", &cfg_.inputs.region},
                                         {"spectrum", &cfg_.inputs.spectrum}}) {
            inputs.push_back({{"role", role}, {"path", path->generic_string()},
                              {"sha256", sha256_hex(*path)}});
        }
        m["inputs"] = inputs;
        m["seeds"] = std::move(seeds);
        ojson outputs = ojson::array();
        for (const auto& name : bundle_.files) {
            const auto path = bundle_.out_dir / name;
            outputs.push_back({{"file", name},
                               {"bytes", static_cast<std::uint64_t>(fs::file_size(path))},
                               {"sha256", sha256_hex(path)}});
        }
        m["outputs"] = outputs;
        write("manifest.json", m.dump(2) + "\n");
        return std::move(bundle_);
    }

private:
    const RunConfig& cfg_;
    std::string command_;
    Bundle bundle_;
};

ojson seeds_json(std::uint64_t seed, std::size_t runs)
{
    ojson s;
    s["base"] = seed;
    s["derivation"] = "splitmix64(seed, run, stream)";
    ojson per = ojson::array();
    for (std::size_t r = 0; r < runs; ++r) {
        const auto rs = run_seeds(seed, r);
        per.push_back({{"run", r},
                       {"users", rs.users},
                       {"surge", rs.surge},
                       {"los", rs.los},
                       {"shadowing", rs.shadowing},
                       {"assoc_order", rs.assoc_order},
                       {"failures", rs.failures}});
    }
    s["runs"] = per;
    return s;
}

ojson operator_metrics_json(const Network& network, const MetricsReport& report)
{
    ojson o = ojson::object();
    for (const auto& [op, m] : report.per_operator) {
        o[network.operator_names.at(op.value)] = {{"users", m.users},
                                                  {"disconnected", m.disconnected},
                                                  {"satisfied", m.satisfied},
                                                  {"fdp", m.fdp},
                                                  {"fsp", m.fsp}};
    }
    return o;
}

} // namespace

LoadedInputs load_inputs(const RunConfig& config, bool allow_empty_network)
{
    try {
        return load_inputs_unchecked(config, allow_empty_network);
    } catch (const IngestError&) {
        throw;
    } catch (const std::exception& e) {
        throw IngestError(e.what());
    }
}

std::string sha256_hex(const fs::path& file)
{
    const std::string data = read_text(file);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

Bundle cmd_run(const RunConfig& config, const fs::path& out_dir, std::size_t threads)
{
    if (std::holds_alternative<SingleBsSweep>(config.scenario.failure)) {
        throw ConfigError({"scenario.failure.type: sweep runs through the importance command"});
    }
    const auto inputs = load_inputs(config);
    const auto& net = inputs.network;
    const auto result = run_scenario(config.scenario, net, inputs.population,
                                     to_model_params(config.model), threads);

    BundleWriter writer(out_dir, config, "run");
    writer.add_warnings(inputs.warnings);
    writer.add_warnings(result.warnings);

    std::string csv = "mode,operator,run,fdp,fsp\n";
    for (const auto& r : result.runs) {
        for (const auto& s : r.series) {
            csv += fmt::format("{},{},{},{},{}\n", to_string(s.key.mode),
                               csv_field(operator_label(net, s.key)), r.run, num(s.report.fdp),
                               num(s.report.fsp));
        }
    }

    ojson res;
    res["version"] = CELLRES_VERSION;
    res["region"] = net.region.id();
    res["cells"] = {{"total", net.cells.size()}, {"in_region", net.in_region_count()}};
    res["population_cells"] = inputs.population.size();
    ojson aggs = ojson::array();
    for (const auto& a : result.aggregates) {
        aggs.push_back({{"mode", to_string(a.key.mode)},
                        {"operator", operator_label(net, a.key)},
                        {"runs", a.runs},
                        {"fdp_mean", a.fdp_mean},
                        {"fdp_std", a.fdp_std},
                        {"fsp_mean", a.fsp_mean},
                        {"fsp_std", a.fsp_std}});
    }
    res["aggregates"] = aggs;
    ojson runs = ojson::array();
    for (const auto& r : result.runs) {
        ojson series = ojson::array();
        for (const auto& s : r.series) {
            ojson e = {{"mode", to_string(s.key.mode)},
                       {"operator", operator_label(net, s.key)},
                       {"users", s.report.user_count},
                       {"fdp", s.report.fdp},
                       {"fsp", s.report.fsp}};
            if (!s.key.op) {
                e["per_subscriber"] = operator_metrics_json(net, s.report);
            }
            series.push_back(std::move(e));
        }
        runs.push_back({{"run", r.run},
                        {"users", r.user_count},
                        {"failed_cells", r.failed_cells},
                        {"series", std::move(series)}});
    }
    res["runs"] = runs;
    res["warnings"] = inputs.warnings;
    for (const auto& w : result.warnings) {
        res["warnings"].push_back(w);
    }

    writer.write("results.json", res.dump(2) + "\n");
    writer.write("fdp_fsp.csv", csv);
    return writer.finish(seeds_json(config.scenario.seed, config.scenario.runs));
}

Bundle cmd_importance(const RunConfig& config, const fs::path& out_dir, std::size_t threads)
{
    const auto inputs = load_inputs(config);
    const auto& net = inputs.network;
    const auto tables = importance_sweep(net, inputs.population, config.scenario,
                                         to_model_params(config.model), threads);
    BundleWriter writer(out_dir, config, "importance");
    writer.add_warnings(inputs.warnings);
    for (const auto& t : tables) {
        const bool secondary = t.mode == AssociationMode::roaming && tables.size() > 1;
        std::string csv = "cell_id,operator,delta_fdp,delta_fsp\n";
        for (const auto& row : t.rows) {
            csv += fmt::format("{},{},{},{}\n", row.cell.value,
                               csv_field(net.operator_names.at(row.op.value)), num(row.delta_fdp),
                               num(row.delta_fsp));
        }
        writer.write(secondary ? "bs_importance_roaming.csv" : "bs_importance.csv", csv);
    }
    return writer.finish(seeds_json(config.scenario.seed, config.scenario.runs));
}

Bundle cmd_coverage(const RunConfig& config, const fs::path& out_dir, std::size_t threads)
{
    const auto inputs = load_inputs(config, true);
    const auto& net = inputs.network;
    const auto model = to_model_params(config.model);

    ScenarioSpec spec = config.scenario;
    if (std::holds_alternative<SingleBsSweep>(spec.failure)) {
        spec.failure = NoFailure{};
    }
    const auto seeds = run_seeds(spec.seed, 0);
    const std::uint64_t coverage_seed = derive_seed(spec.seed, 0, Stream::coverage);
    auto active = net.cells.empty() ? std::vector<bool>{} : run_active_cells(spec, net, seeds);
    const RadioEnvironment radio(net.cells, std::move(active), model.radio, coverage_seed,
                                 seeds.shadowing);

    BundleWriter writer(out_dir, config, "coverage");
    writer.add_warnings(inputs.warnings);
    ojson summary = ojson::object();
    for (const auto& key : series_for(spec.mode, net.operator_names.size())) {
        const std::string label =
            key.op ? file_label(net.operator_names.at(key.op->value)) : std::string("roaming");
        const auto raster =
            coverage_raster(net.region, radio, key.op, model.gamma_min_db, label, threads);
        std::string csv = "x_m,y_m,best_sinr_db\n";
        for (std::size_t i = 0; i < raster.size(); ++i) {
            const Point c = raster.center(i);
            csv += fmt::format("{},{},{}\n", num(c.x), num(c.y), num(raster.best_sinr_db[i]));
        }
        writer.write(fmt::format("coverage_{}.csv", label), csv);
        std::string ecdf = "sinr_db,cum_fraction\n";
        for (const auto& [v, f] : sinr_ecdf(raster)) {
            ecdf += fmt::format("{},{}\n", num(v), num(f));
        }
        writer.write(fmt::format("ecdf_{}.csv", label), ecdf);
        summary[label] = {{"mode", to_string(key.mode)},
                          {"operator", operator_label(net, key)},
                          {"squares", raster.size()},
                          {"columns", raster.columns},
                          {"rows", raster.rows},
                          {"in_region_squares", raster.in_region_count},
                          {"below_threshold_fraction", raster.below_threshold_fraction}};
    }
    ojson doc;
    doc["gamma_min_db"] = model.gamma_min_db;
    doc["square_size_m"] = kCoverageSquareSize;
    doc["coverage_seed"] = coverage_seed;
    doc["series"] = summary;
    writer.write("coverage_summary.json", doc.dump(2) + "\n");
    return writer.finish(seeds_json(spec.seed, 1));
}

int execute(Command command, const fs::path& config_path, const Overrides& overrides,
            std::ostream& out, std::ostream& err)
{
    try {
        const RunConfig cfg = apply_overrides(load_config(config_path), overrides);
        std::size_t threads = overrides.threads ? *overrides.threads : configured_threads();
        if (threads == 0) {
            threads = std::max(1u, std::thread::hardware_concurrency());
        }
        const fs::path dir = overrides.out_dir.value_or(fs::path("out"));
        Bundle bundle;
        switch (command) {
        case Command::run: bundle = cmd_run(cfg, dir, threads); break;
        case Command::importance: bundle = cmd_importance(cfg, dir, threads); break;
        case Command::coverage: bundle = cmd_coverage(cfg, dir, threads); break;
        }
        for (const auto& w : bundle.warnings) {
            err << "warning: " << w << '\n';
        }
        for (const auto& f : bundle.files) {
            out << (bundle.out_dir / f).string() << '\n';
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        for (const auto& d : e.diagnostics()) {
            err << "config error: " << d << '\n';
        }
        return kExitConfig;
    } catch (const IngestError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitIngest;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace cellres

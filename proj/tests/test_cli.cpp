#include "support.hpp"

#include "cellres/commands.hpp"
#include "cellres/config.hpp"
#include "cellres/errors.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <sys/wait.h>
#include <random>
#include <sstream>

using namespace cellres;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"inputs": {"antennas": "a.csv", "population": "p.csv", "region": "r.csv", "spectrum": "s.json"}})";

std::vector<std::string> diagnostics_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.diagnostics();
    }
    return {};
}

std::size_t count_lines(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

int run_command(Command c, const fs::path& cfg, Overrides o, std::string* err_text = nullptr)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = execute(c, cfg, o, out, err);
    if (err_text) *err_text = err.str();
    return code;
}

} // namespace

TEST_CASE("config defaults")
{
    const auto cfg = parse_config(kMinimal);
    CHECK(cfg.model.gamma_min_db == 5.0);
    CHECK(cfg.model.active_fraction == 0.02);
    CHECK(cfg.model.r_max_m == 5000.0);
    CHECK(cfg.model.rate_min_mbps == 8.0);
    CHECK(cfg.model.rate_max_mbps == 20.0);
    CHECK(cfg.model.border_margin_m == 2000.0);
    CHECK(cfg.model.coordination_k == 3);
    CHECK(cfg.model.noise_figure_db == 7.8);
    CHECK_FALSE(cfg.model.shadowing);
    CHECK(cfg.scenario.runs == 100);
    CHECK(cfg.scenario.mode == ModeSelection::both);
    CHECK(std::holds_alternative<NoFailure>(cfg.scenario.failure));
    CHECK(cfg.inputs.region_crs == RegionCrs::planar);
    CHECK_FALSE(cfg.projection.has_value());

    const auto m = to_model_params(cfg.model);
    CHECK(m.rate_min_bps == 8e6);
    CHECK(m.rate_max_bps == 20e6);
    CHECK(m.radio.r_max_m == 5000.0);
    CHECK(m == ModelParams{});
}

TEST_CASE("config round trip is the identity")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        RunConfig c;
        c.inputs = {"dir/ant enna.csv", "/abs/pop.csv", "r.geojson", "s.json",
                    trial % 2 ? RegionCrs::geographic : RegionCrs::planar};
        if (trial % 3 == 0) c.projection = Projection{50 + u(rng), 5 + u(rng), 1e5 * u(rng), -1e5 * u(rng)};
        c.model.gamma_min_db = 20 * u(rng) - 5;
        c.model.active_fraction = u(rng);
        c.model.r_max_m = 1 + 1e4 * u(rng);
        c.model.rate_min_mbps = 10 * u(rng);
        c.model.rate_max_mbps = c.model.rate_min_mbps + 10 * u(rng);
        c.model.noise_figure_db = 10 * u(rng);
        c.model.ut_height_m = 1 + u(rng);
        c.model.border_margin_m = 3000 * u(rng);
        c.model.coordination_k = rng() % 7;
        c.model.shadowing = trial % 2;
        if (trial % 4 == 0) c.model.operator_split = {{"A", 0.25}, {"B", 0.75}};
        c.scenario.mode = static_cast<ModeSelection>(trial % 3);
        switch (trial % 4) {
        case 0: c.scenario.failure = NoFailure{}; break;
        case 1: c.scenario.failure = IsolatedFailure{u(rng)}; break;
        case 2:
            c.scenario.failure = CorrelatedFailure{trial % 8 == 2 ? std::optional<Point>(Point{u(rng), -u(rng)})
                                                                   : std::nullopt,
                                                   1e4 * u(rng)};
            break;
        default: c.scenario.failure = SingleBsSweep{};
        }
        c.scenario.p_pop = 100 * u(rng);
        c.scenario.runs = 1 + rng() % 500;
        c.scenario.seed = rng();
        c.scenario.region_id = "region " + std::to_string(trial);
        const auto text = serialize_config(c);
        const auto back = parse_config(text);
        CHECK(back == c);
        CHECK(serialize_config(back) == text);
    }
}

TEST_CASE("config diagnostics")
{
    CHECK(diagnostics_of("{").size() == 1);
    CHECK(diagnostics_of("[]").size() == 1);
    CHECK(diagnostics_of("{}").size() == 1); // inputs missing
    const auto d = diagnostics_of(
        R"({"inputs": {"antennas": "a", "population": 3, "region": "r", "spectrum": "s", "extra": 1},
            "model": {"gamma_min_db": "five", "coordination_k": -1},
            "scenario": {"mode": "solo", "failure": {"type": "meteor"}},
            "bogus": true})");
    CHECK(d.size() == 7);
    const auto values = diagnostics_of(
        R"({"inputs": {"antennas": "a", "population": "p", "region": "r", "spectrum": "s"},
            "scenario": {"runs": 0}})");
    CHECK(values.size() == 1);
    CHECK(diagnostics_of(R"({"inputs": {"antennas": "a", "population": "p", "region": "r", "spectrum": "s"},
                             "scenario": {"failure": {"type": "isolated"}}})")
              .size() == 1);
    CHECK(diagnostics_of(R"({"inputs": {"antennas": "a", "population": "p", "region": "r", "spectrum": "s"},
                             "model": {"operator_split": {"A": 0.5}}})")
              .size() == 1);
}

TEST_CASE("overrides")
{
    const auto base = parse_config(kMinimal);
    Overrides o;
    o.runs = 5;
    o.seed = 123;
    o.p_iso = 0.2;
    o.mode = "roaming";
    o.p_pop = 10;
    const auto c = apply_overrides(base, o);
    CHECK(c.scenario.runs == 5);
    CHECK(c.scenario.seed == 123);
    CHECK(c.scenario.p_pop == 10);
    CHECK(c.scenario.mode == ModeSelection::roaming);
    CHECK(std::get<IsolatedFailure>(c.scenario.failure).p_iso == 0.2);

    Overrides r;
    r.r_fail_m = 750;
    CHECK(std::get<CorrelatedFailure>(apply_overrides(base, r).scenario.failure).r_fail_m == 750);
    Overrides both = o;
    both.r_fail_m = 1;
    CHECK_THROWS_AS(apply_overrides(base, both), ConfigError);
    Overrides bad_mode;
    bad_mode.mode = "nope";
    CHECK_THROWS_AS(apply_overrides(base, bad_mode), ConfigError);
    Overrides zero_runs;
    zero_runs.runs = 0;
    CHECK_THROWS_AS(apply_overrides(base, zero_runs), ConfigError);
}

TEST_CASE("load_config resolves input paths against the config directory")
{
    const auto dir = testing::temp_dir("load_config");
    testing::write_file(dir / "c.json", kMinimal);
    const auto cfg = load_config(dir / "c.json");
    CHECK(cfg.inputs.antennas == (fs::absolute(dir) / "a.csv").lexically_normal());
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("run command: bundle, row accounting, determinism, manifest")
{
    const auto dir = testing::temp_dir("run");
    const auto cfg = testing::write_tiny_inputs(dir, 3);
    Overrides o;
    o.out_dir = dir / "out1";
    o.threads = 1;
    std::string err;
    REQUIRE(run_command(Command::run, cfg, o, &err) == kExitOk);
    CHECK(err.find("omnidirectional") != std::string::npos);
    const auto csv = testing::read_file(dir / "out1" / "fdp_fsp.csv");
    CHECK(csv.rfind("mode,operator,run,fdp,fsp\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + 3 * 3); // 2 operators + roaming per run

    o.out_dir = dir / "out2";
    o.threads = 4;
    REQUIRE(run_command(Command::run, cfg, o) == kExitOk);
    CHECK(testing::read_file(dir / "out2" / "fdp_fsp.csv") == csv);
    CHECK(testing::read_file(dir / "out2" / "results.json") == testing::read_file(dir / "out1" / "results.json"));

    o.out_dir = dir / "out5";
    o.runs = 5;
    REQUIRE(run_command(Command::run, cfg, o) == kExitOk);
    CHECK(count_lines(testing::read_file(dir / "out5" / "fdp_fsp.csv")) == 1 + 5 * 3);

    const auto manifest = nlohmann::json::parse(testing::read_file(dir / "out5" / "manifest.json"));
    CHECK(manifest["command"] == "run");
    CHECK(manifest["config"]["scenario"]["runs"] == 5);
    CHECK(manifest["seeds"]["runs"].size() == 5);
    REQUIRE(manifest["outputs"].size() == 2);
    for (const auto& f : manifest["outputs"]) {
        CHECK(f["sha256"] == sha256_hex(dir / "out5" / f["file"].get<std::string>()));
    }
    // the echoed config reproduces the bundle
    testing::write_file(dir / "echo.json", manifest["config"].dump());
    Overrides e;
    e.out_dir = dir / "echo";
    REQUIRE(run_command(Command::run, dir / "echo.json", e) == kExitOk);
    CHECK(testing::read_file(dir / "echo" / "fdp_fsp.csv") == testing::read_file(dir / "out5" / "fdp_fsp.csv"));

    const auto results = nlohmann::json::parse(testing::read_file(dir / "out1" / "results.json"));
    CHECK(results["aggregates"].size() == 3);
    CHECK(results["runs"][0]["series"][2]["per_subscriber"].contains("A"));
}

TEST_CASE("exit codes")
{
    const auto dir = testing::temp_dir("exit");
    const auto cfg = testing::write_tiny_inputs(dir, 1);
    Overrides o;
    o.out_dir = dir / "out";

    testing::write_file(dir / "bad.json", R"({"inputs": {}})");
    CHECK(run_command(Command::run, dir / "bad.json", o) == kExitConfig);
    CHECK(run_command(Command::run, dir / "nope.json", o) == kExitConfig);
    Overrides bad = o;
    bad.p_iso = 2.0;
    CHECK(run_command(Command::run, cfg, bad) == kExitConfig);

    const auto good_antennas = testing::read_file(dir / "antennas.csv");
    testing::write_file(dir / "antennas.csv", "site,operator\n");
    CHECK(run_command(Command::run, cfg, o) == kExitIngest);
    testing::write_file(dir / "antennas.csv",
                        "site_id,operator,x_m,y_m,height_m,azimuth_deg,frequency_mhz,bandwidth_mhz,eirp_dbw,technology\n"
                        "Far,A,90000,90000,30,0,1800,20,30,4G\n");
    CHECK(run_command(Command::run, cfg, o) == kExitIngest);
    testing::write_file(dir / "antennas.csv", good_antennas);
    testing::write_file(dir / "spectrum.json", R"({"A": {"4G": [[1800, 20]]}, "B": {"4G": [[1805, 20]]}})");
    CHECK(run_command(Command::run, cfg, o) == kExitIngest);
}

TEST_CASE("importance command writes one row per in-region cell")
{
    const auto dir = testing::temp_dir("importance");
    const auto cfg = testing::write_tiny_inputs(dir, 2);
    Overrides o;
    o.out_dir = dir / "out";
    REQUIRE(run_command(Command::importance, cfg, o) == kExitOk);
    const auto per_op = testing::read_file(dir / "out" / "bs_importance.csv");
    CHECK(per_op.rfind("cell_id,operator,delta_fdp,delta_fsp\n", 0) == 0);
    CHECK(count_lines(per_op) == 1 + 6);
    CHECK(count_lines(testing::read_file(dir / "out" / "bs_importance_roaming.csv")) == 1 + 6);

    o.mode = "roaming";
    o.out_dir = dir / "roam";
    REQUIRE(run_command(Command::importance, cfg, o) == kExitOk);
    CHECK(fs::exists(dir / "roam" / "bs_importance.csv"));
    CHECK_FALSE(fs::exists(dir / "roam" / "bs_importance_roaming.csv"));
}

TEST_CASE("coverage command: rasters per series, -inf for an empty network")
{
    const auto dir = testing::temp_dir("coverage");
    const auto cfg = testing::write_tiny_inputs(dir, 1);
    Overrides o;
    o.out_dir = dir / "out";
    REQUIRE(run_command(Command::coverage, cfg, o) == kExitOk);
    for (const char* label : {"A", "B", "roaming"}) {
        const auto raster = testing::read_file(dir / "out" / (std::string("coverage_") + label + ".csv"));
        CHECK(count_lines(raster) == 1 + 40 * 40);
        const auto ecdf = testing::read_file(dir / "out" / (std::string("ecdf_") + label + ".csv"));
        CHECK(ecdf.rfind("sinr_db,cum_fraction\n", 0) == 0);
        CHECK(ecdf.substr(ecdf.size() - 3) == ",1\n");
    }
    const auto summary = nlohmann::json::parse(testing::read_file(dir / "out" / "coverage_summary.json"));
    CHECK(summary["series"]["roaming"]["below_threshold_fraction"].get<double>() <=
          summary["series"]["A"]["below_threshold_fraction"].get<double>());

    testing::write_file(dir / "antennas.csv",
                        "site_id,operator,x_m,y_m,height_m,azimuth_deg,frequency_mhz,bandwidth_mhz,eirp_dbw,technology\n");
    o.out_dir = dir / "empty";
    o.mode = "roaming";
    REQUIRE(run_command(Command::coverage, cfg, o) == kExitOk);
    const auto raster = testing::read_file(dir / "empty" / "coverage_roaming.csv");
    CHECK(raster.find("-inf\n") != std::string::npos);
    CHECK(raster.find("e+") == std::string::npos);
    CHECK(testing::read_file(dir / "empty" / "ecdf_roaming.csv") == "sinr_db,cum_fraction\n-inf,1\n");
}

TEST_CASE("command-line binary")
{
    const auto dir = testing::temp_dir("binary");
    const std::string cli = CELLRES_CLI_PATH;
    const std::string example = std::string(CELLRES_EXAMPLE_DIR) + "/config.json";
    const auto status = [](const std::string& cmd) {
        const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status(cli + " run " + example + " --runs 1 --mode roaming --out-dir " + (dir / "o").string()) == 0);
    CHECK(count_lines(testing::read_file(dir / "o" / "fdp_fsp.csv")) == 2);
    CHECK(status(cli + " run " + example + " --runs 1 --p-iso 0.1 --r-fail 10") == 2);
    CHECK(status(cli + " run") == 2);
    CHECK(status(cli + " frobnicate") == 2);
    CHECK(status(cli + " --version") == 0);
}

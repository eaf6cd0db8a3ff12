#pragma once

#include "cellres/association.hpp"
#include "cellres/ingest.hpp"
#include "cellres/metrics.hpp"
#include "cellres/radio.hpp"
#include "cellres/scenarios.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testing {

using namespace cellres;

inline Cell make_cell(std::uint32_t id, std::uint16_t op, double x, double y,
                      double azimuth = 0.0, double freq_mhz = 1800.0, double bw_mhz = 20.0,
                      double eirp_dbw = 30.0, Environment env = Environment::UMa,
                      double height = 25.0)
{
    Cell c;
    c.id = CellId{id};
    c.site_id = "S" + std::to_string(id);
    c.operator_id = OperatorId{op};
    c.position = {x, y};
    c.azimuth_deg = azimuth;
    c.frequency_mhz = freq_mhz;
    c.bandwidth_hz = bw_mhz * 1e6;
    c.tx_power_w = derated_power_w(eirp_dbw);
    c.environment = env;
    c.height_m = height;
    c.in_region = true;
    return c;
}

inline User make_user(std::uint32_t id, double x, double y, std::optional<std::uint16_t> op,
                      double rate_bps = 10e6)
{
    User u;
    u.id = id;
    u.position = {x, y};
    if (op) {
        u.subscription = OperatorId{*op};
    }
    u.rate_requirement_bps = rate_bps;
    return u;
}

inline Region square_region(double side, std::string id = "square")
{
    return Region(std::move(id), {{0, 0}, {side, 0}, {side, side}, {0, side}});
}

// Random multi-operator layout inside a square: cells_per_op cells per operator on a
// small set of shared frequencies, users uniform with random subscriptions.
struct RandomFixture {
    std::vector<Cell> cells;
    std::vector<User> users;
    std::size_t operators = 0;
};

inline RandomFixture random_fixture(std::mt19937_64& rng, std::size_t operators,
                                    std::size_t max_cells_per_op, std::size_t max_users,
                                    double side = 3000.0)
{
    std::uniform_real_distribution<double> pos(0.0, side);
    std::uniform_real_distribution<double> az(0.0, 360.0);
    std::uniform_real_distribution<double> eirp(20.0, 35.0);
    std::uniform_real_distribution<double> rate(8e6, 20e6);
    std::uniform_int_distribution<int> env(0, 1);
    const double freqs[] = {800.0, 1800.0, 2600.0};
    std::uniform_int_distribution<int> fpick(0, 2);

    RandomFixture f;
    f.operators = operators;
    std::uint32_t id = 1;
    for (std::size_t op = 0; op < operators; ++op) {
        std::uniform_int_distribution<std::size_t> count(1, max_cells_per_op);
        const std::size_t n = count(rng);
        for (std::size_t k = 0; k < n; ++k) {
            // distinct frequency per operator keeps operator carriers disjoint in reality;
            // co-channel across operators is allowed in the model
            f.cells.push_back(make_cell(id, static_cast<std::uint16_t>(op), pos(rng), pos(rng), az(rng),
                                        freqs[fpick(rng)], 10.0, eirp(rng),
                                        env(rng) ? Environment::RMa : Environment::UMa));
            id += 1 + static_cast<std::uint32_t>(rng() % 3);
        }
    }
    std::sort(f.cells.begin(), f.cells.end(), [](const Cell& a, const Cell& b) { return a.id < b.id; });
    std::uniform_int_distribution<std::size_t> ucount(1, max_users);
    const std::size_t users = ucount(rng);
    std::uniform_int_distribution<std::uint16_t> opick(0, static_cast<std::uint16_t>(operators - 1));
    for (std::uint32_t u = 0; u < users; ++u) {
        f.users.push_back(make_user(u, pos(rng), pos(rng), opick(rng), rate(rng)));
    }
    return f;
}

// Step-by-step replay of the greedy rule: every user in the given order scans all cells,
// keeps those that are active, allowed, within r_max and at or above gamma_min, and
// joins the one with the largest gamma / (load + 1); ties go to the smallest cell id.
struct ReplayResult {
    std::vector<std::optional<std::uint32_t>> serving;
    std::vector<double> sinr;
};

inline ReplayResult replay_association(std::span<const User> users, const RadioEnvironment& radio,
                                       AssociationMode mode, double gamma_min_linear,
                                       const std::vector<std::size_t>& order)
{
    const auto cells = radio.cells();
    ReplayResult r;
    r.serving.assign(users.size(), std::nullopt);
    r.sinr.assign(users.size(), 0.0);
    std::vector<std::uint32_t> load(cells.size(), 0);
    for (std::size_t u : order) {
        const User& user = users[u];
        std::vector<std::pair<std::uint32_t, double>> feasible;
        for (std::uint32_t j = 0; j < cells.size(); ++j) {
            if (!radio.is_active(j)) continue;
            if (mode == AssociationMode::single_operator &&
                (!user.subscription || *user.subscription != cells[j].operator_id))
                continue;
            const double dx = cells[j].position.x - user.position.x;
            const double dy = cells[j].position.y - user.position.y;
            if (std::sqrt(dx * dx + dy * dy) > radio.params().r_max_m) continue;
            const double g = radio.link(user.id, user.position, j).sinr;
            if (g >= gamma_min_linear) feasible.emplace_back(j, g);
        }
        if (feasible.empty()) continue;
        std::size_t best = 0;
        for (std::size_t k = 1; k < feasible.size(); ++k) {
            const double a = feasible[k].second / (load[feasible[k].first] + 1.0);
            const double b = feasible[best].second / (load[feasible[best].first] + 1.0);
            if (a > b || (a == b && cells[feasible[k].first].id < cells[feasible[best].first].id)) {
                best = k;
            }
        }
        r.serving[u] = feasible[best].first;
        r.sinr[u] = feasible[best].second;
        ++load[feasible[best].first];
    }
    return r;
}

inline std::filesystem::path temp_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("cellres_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    f << text;
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Tiny on-disk scenario: a 2 km square town, two operators, six tri-sector cells.
inline std::filesystem::path write_tiny_inputs(const std::filesystem::path& dir, std::size_t runs = 3,
                                               std::uint64_t seed = 11)
{
    write_file(dir / "spectrum.json",
               R"({"A": {"4G": [[1800, 20]]}, "B": {"4G": [[2600, 20]], "5G": [[800, 10]]}})");
    std::string pop = "cell_x_m,cell_y_m,population,urbanity\n";
    for (int ix = -2; ix < 6; ++ix) {
        for (int iy = -2; iy < 6; ++iy) {
            const bool inner = ix >= 0 && ix < 4 && iy >= 0 && iy < 4;
            pop += std::to_string(ix * 500) + "," + std::to_string(iy * 500) + "," +
                   (inner ? "900" : "100") + "," + (inner ? "2" : "4") + "\n";
        }
    }
    write_file(dir / "population.csv", pop);
    write_file(dir / "region.csv", "x_m,y_m\n0,0\n2000,0\n2000,2000\n0,2000\n");
    write_file(dir / "antennas.csv",
               "site_id,operator,x_m,y_m,height_m,azimuth_deg,frequency_mhz,bandwidth_mhz,eirp_dbw,technology\n"
               "A1,A,500,500,30,0,1800,20,30,4G\n"
               "A1,A,500,500,30,120,1800,20,30,4G\n"
               "A1,A,500,500,30,240,1800,20,30,4G\n"
               "B1,B,1500,1400,25,60,2600,20,31,4G\n"
               "B1,B,1500,1400,25,180,800,10,29,5G\n"
               "B1,B,1500,1400,25,300,2600,20,31,4G\n"
               "X,A,1000,1000,10,OMNI,1800,20,10,4G\n");
    const std::string cfg = R"({
  "inputs": {"antennas": "antennas.csv", "population": "population.csv",
             "region": "region.csv", "spectrum": "spectrum.json"},
  "scenario": {"mode": "both", "runs": )" + std::to_string(runs) +
                            R"(, "seed": )" + std::to_string(seed) + R"(, "region_id": "tiny"}
})";
    write_file(dir / "config.json", cfg);
    return dir / "config.json";
}

} // namespace testing

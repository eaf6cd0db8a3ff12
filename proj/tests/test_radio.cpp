#include "support.hpp"

#include "cellres/errors.hpp"
#include "cellres/radio.hpp"

#include <doctest.h>

using namespace cellres;
using testing::make_cell;

namespace {

struct PlCase {
    Environment env;
    LosState los;
    double hbs;
    double hut;
    double fc_ghz;
    double d2d;
    double expected_db;
};

// Frozen from tests/oracles/tr38901.py (50-digit closed-form evaluation).
const PlCase kPathLoss[] = {
    {Environment::UMa, LosState::los, 25, 1.5, 2.6, 50, 74.630288085889642},
    {Environment::UMa, LosState::nlos, 25, 1.5, 2.6, 50, 89.928943760442531},
    {Environment::UMa, LosState::los, 25, 1.5, 2.6, 800, 105.27442494591796},
    {Environment::UMa, LosState::nlos, 25, 1.5, 2.6, 800, 135.29954308194681},
    {Environment::UMa, LosState::los, 25, 1.5, 2.6, 4000, 133.22603317216789},
    {Environment::UMa, LosState::nlos, 25, 1.5, 2.6, 4000, 162.60826431899298},
    {Environment::RMa, LosState::los, 35, 1.5, 0.8, 50, 66.326993581464846},
    {Environment::RMa, LosState::nlos, 35, 1.5, 0.8, 50, 70.442867318513116},
    {Environment::RMa, LosState::los, 35, 1.5, 0.8, 800, 90.378981007278499},
    {Environment::RMa, LosState::nlos, 35, 1.5, 0.8, 800, 113.86607086064081},
    {Environment::RMa, LosState::los, 35, 1.5, 0.8, 4000, 117.63630025460229},
    {Environment::RMa, LosState::nlos, 35, 1.5, 0.8, 4000, 140.85554178483082},
    {Environment::UMa, LosState::los, 30, 1.5, 1.8, 10, 65.666702694469666},
    {Environment::RMa, LosState::nlos, 20, 1.5, 2.1, 2500, 147.75908385662403},
};

PropagationParams prop(const PlCase& c)
{
    return {c.env, c.hbs, c.hut, c.fc_ghz, c.los};
}

} // namespace

TEST_CASE("path loss matches the closed-form oracle")
{
    for (const auto& c : kPathLoss) {
        CAPTURE(c.d2d);
        CHECK(std::abs(path_loss_db(prop(c), c.d2d) - c.expected_db) < 1e-6);
    }
}

TEST_CASE("path loss validity checks and clamping")
{
    PropagationParams p{Environment::UMa, 25, 1.5, 2.0, LosState::los};
    CHECK(path_loss_db(p, 0.0) == path_loss_db(p, 10.0));
    CHECK(path_loss_db(p, 3.0) == path_loss_db(p, 10.0));
    p.carrier_ghz = 0.4;
    CHECK_THROWS_AS(path_loss_db(p, 100), ValidationError);
    p.carrier_ghz = 101;
    CHECK_THROWS_AS(path_loss_db(p, 100), ValidationError);
    p.carrier_ghz = 2.0;
    p.bs_height_m = 0;
    CHECK_THROWS_AS(path_loss_db(p, 100), ValidationError);
    p.bs_height_m = 25;
    p.los = LosState::unresolved;
    CHECK_THROWS_AS(path_loss_db(p, 100), ValidationError);
    p.los = LosState::los;
    CHECK_THROWS_AS(path_loss_db(p, -1), ValidationError);
}

TEST_CASE("path loss properties: NLOS >= LOS, monotone in distance and frequency")
{
    for (Environment env : {Environment::UMa, Environment::RMa}) {
        double prev_los = 0.0;
        double prev_nlos = 0.0;
        for (double d = 10; d <= 10000; d *= 1.07) {
            PropagationParams p{env, 30, 1.5, 1.8, LosState::los};
            const double los = path_loss_db(p, d);
            p.los = LosState::nlos;
            const double nlos = path_loss_db(p, d);
            CHECK(nlos >= los);
            CHECK(los >= prev_los);
            CHECK(nlos >= prev_nlos);
            prev_los = los;
            prev_nlos = nlos;
            PropagationParams hi{env, 30, 1.5, 2.6, LosState::los};
            CHECK(path_loss_db(hi, d) > los);
        }
    }
}

TEST_CASE("LOS probability")
{
    CHECK(los_probability(Environment::UMa, 0) == 1.0);
    CHECK(los_probability(Environment::UMa, 18) == 1.0);
    CHECK(std::abs(los_probability(Environment::UMa, 100) - 0.3476708368442312) < 1e-12);
    CHECK(std::abs(los_probability(Environment::UMa, 1000) - 0.018000125472422489) < 1e-12);
    CHECK(los_probability(Environment::RMa, 10) == 1.0);
    CHECK(std::abs(los_probability(Environment::RMa, 1010) - std::exp(-1.0)) < 1e-12);
    CHECK(std::abs(los_probability(Environment::RMa, 3000) - 0.050287436723591874) < 1e-12);
    CHECK_THROWS_AS(los_probability(Environment::RMa, -1), ValidationError);
    for (double d = 0; d < 5000; d += 37) {
        const double p = los_probability(Environment::UMa, d);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("horizontal pattern")
{
    CHECK(horizontal_gain_db(0) == 0.0);
    CHECK(std::abs(horizontal_gain_db(32.5) + 3.0) < 1e-9);
    CHECK(std::abs(horizontal_gain_db(-32.5) + 3.0) < 1e-9);
    CHECK(std::abs(horizontal_gain_db(65) + 12.0) < 1e-9);
    CHECK(std::abs(horizontal_gain_db(10) + 0.28402366863905325) < 1e-9);
    CHECK(std::abs(horizontal_gain_db(83.9) + 19.993022485207103) < 1e-9);
    CHECK(horizontal_gain_db(90) == -20.0);
    CHECK(horizontal_gain_db(-180) == -20.0);
    for (double phi = -180; phi <= 180; phi += 1.3) {
        CHECK(horizontal_gain_db(phi) == horizontal_gain_db(-phi));
        CHECK(horizontal_gain_db(phi) <= 0.0);
        CHECK(horizontal_gain_db(phi) >= -20.0);
    }
}

TEST_CASE("misalignment uses compass bearings")
{
    const Point o{0, 0};
    CHECK(misalignment_deg(0, o, {0, 100}) == doctest::Approx(0));
    CHECK(misalignment_deg(90, o, {100, 0}) == doctest::Approx(0));
    CHECK(misalignment_deg(0, o, {100, 0}) == doctest::Approx(90));
    CHECK(misalignment_deg(0, o, {-100, 0}) == doctest::Approx(-90));
    CHECK(misalignment_deg(350, o, {0, 100}) == doctest::Approx(10));
    CHECK(std::abs(misalignment_deg(0, o, {0, -100})) == doctest::Approx(180));
}

TEST_CASE("noise and SINR")
{
    const NoiseModel n;
    // -174 dBm/Hz + 10log10(20e6) + 7.8 dB
    const double expected_dbm = -174.0 + 10.0 * std::log10(20e6) + 7.8;
    CHECK(10.0 * std::log10(n.power_w(20e6)) + 30.0 == doctest::Approx(expected_dbm).epsilon(1e-12));
    CHECK_THROWS_AS(n.power_w(0.0), ValidationError);
    CHECK(sinr_linear(2.0, 1.0, 1.0) == 1.0);
    CHECK_THROWS_AS(sinr_linear(1.0, 0.0, 1.0), ValidationError);
    CHECK(derated_power_w(30.0) == doctest::Approx(900.0));
}

TEST_CASE("bandwidth allocation and throughput")
{
    CHECK(min_bandwidth_hz(10e6, 3.0) == doctest::Approx(5e6));
    CHECK_THROWS_AS(min_bandwidth_hz(10e6, 0.0), ValidationError);
    const std::vector<double> need{1e6, 3e6};
    const auto shares = allocate_bandwidth(need);
    CHECK(shares[0] == doctest::Approx(0.25));
    CHECK(shares[1] == doctest::Approx(0.75));
    CHECK(allocate_bandwidth(std::vector<double>{0, 0}) == std::vector<double>{0.5, 0.5});
    CHECK(allocate_bandwidth(std::vector<double>{}).empty());
    CHECK(throughput_bps(0.5, 20e6, 3.0) == doctest::Approx(20e6));
}

TEST_CASE("coordination: k nearest co-channel cells do not interfere")
{
    // serving at origin; co-channel neighbours at 1, 2, 3, 4 km; one on another carrier
    std::vector<Cell> cells{make_cell(1, 0, 0, 0), make_cell(2, 0, 1000, 0), make_cell(3, 1, 2000, 0),
                            make_cell(4, 0, 3000, 0), make_cell(5, 1, 4000, 0),
                            make_cell(6, 0, 500, 0, 0, 2600.0)};
    const std::vector<bool> all(cells.size(), true);
    CHECK(interferer_set(cells, all, 0, 5000, 3) == std::vector<std::uint32_t>{4});
    CHECK(interferer_set(cells, all, 0, 3500, 3).empty());
    CHECK(interferer_set(cells, all, 0, 5000, 0) == std::vector<std::uint32_t>{1, 2, 3, 4});
    CHECK(interferer_set(cells, all, 5, 5000, 0).empty());
    std::vector<bool> one_down = all;
    one_down[1] = false;
    CHECK(interferer_set(cells, one_down, 0, 5000, 3).empty());
    // equidistant neighbours broken by id
    std::vector<Cell> ring{make_cell(1, 0, 0, 0), make_cell(2, 0, 1000, 0), make_cell(3, 0, -1000, 0),
                           make_cell(4, 0, 0, 1000), make_cell(5, 0, 0, -1000)};
    CHECK(interferer_set(ring, std::vector<bool>(5, true), 0, 5000, 3) == std::vector<std::uint32_t>{4});
}

TEST_CASE("radio environment link budget matches the component formulas")
{
    std::vector<Cell> cells{make_cell(1, 0, 0, 0, 45), make_cell(2, 0, 1500, 0), make_cell(3, 0, 0, 1500),
                            make_cell(4, 0, 1500, 1500), make_cell(7, 0, 3000, 0, 270)};
    RadioParams params;
    params.coordination_k = 3;
    const RadioEnvironment radio(cells, std::vector<bool>(cells.size(), true), params, 77);
    const Point at{300, 400};
    const auto b = radio.link(9, at, 0);
    PropagationParams p{Environment::UMa, 25, 1.5, 1.8, b.los ? LosState::los : LosState::nlos};
    const double pl = path_loss_db(p, 500);
    const double gain = horizontal_gain_db(misalignment_deg(45, {0, 0}, at));
    CHECK(b.path_loss_db == doctest::Approx(pl));
    CHECK(b.gain_db == doctest::Approx(gain));
    CHECK(b.received_power_w == doctest::Approx(900.0 * std::pow(10.0, (gain - pl) / 10.0)));
    CHECK(b.noise_w == doctest::Approx(NoiseModel{}.power_w(20e6)));
    CHECK(b.interference_w == doctest::Approx(radio.received_power_w(9, at, 4)));
    CHECK(b.sinr == doctest::Approx(b.received_power_w / (b.noise_w + b.interference_w)));
    CHECK(b.snr > b.sinr);

    const std::uint32_t all[] = {0, 1, 2, 3, 4};
    const auto many = radio.links(9, at, all);
    for (std::uint32_t j = 0; j < 5; ++j) {
        CHECK(many[j].sinr == radio.link(9, at, j).sinr);
    }
    // LOS draw depends only on seed, receiver and cell id
    const RadioEnvironment other(cells, {true, false, true, true, true}, params, 77);
    CHECK(other.draws_los(9, at, 0) == radio.draws_los(9, at, 0));
    CHECK(radio.index_of(CellId{7}) == 4u);
    CHECK_FALSE(radio.index_of(CellId{5}).has_value());
    CHECK(radio.without(1).active() == std::vector<bool>{true, false, true, true, true});
    CHECK(radio.active_within({0, 0}, 1500) == std::vector<std::uint32_t>{0, 1, 2});

    std::vector<Cell> unsorted{make_cell(2, 0, 0, 0), make_cell(1, 0, 10, 0)};
    CHECK_THROWS_AS(RadioEnvironment(unsorted, {true, true}, params, 1), ValidationError);
    CHECK_THROWS_AS(RadioEnvironment(cells, {true}, params, 1), ValidationError);
}

TEST_CASE("LOS draws follow the LOS probability")
{
    std::vector<Cell> cells{make_cell(1, 0, 0, 0, 0, 1800, 20, 30, Environment::RMa)};
    const RadioEnvironment radio(cells, {true}, RadioParams{}, 5);
    const int n = 20000;
    int los = 0;
    for (int r = 0; r < n; ++r) {
        los += radio.draws_los(static_cast<std::uint64_t>(r), {0, 1010}, 0) ? 1 : 0;
    }
    const double p = std::exp(-1.0);
    CHECK(std::abs(los / double(n) - p) < 5 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("shadowing sigma and application")
{
    PropagationParams p{Environment::UMa, 25, 1.5, 2.0, LosState::los};
    CHECK(shadowing_sigma_db(p, 100) == 4.0);
    p.los = LosState::nlos;
    CHECK(shadowing_sigma_db(p, 100) == 6.0);
    p.environment = Environment::RMa;
    CHECK(shadowing_sigma_db(p, 100) == 8.0);
    p.los = LosState::los;
    CHECK(shadowing_sigma_db(p, 100) == 4.0);
    CHECK(shadowing_sigma_db(p, 10000) == 6.0);

    std::vector<Cell> cells{make_cell(1, 0, 0, 0)};
    RadioParams on;
    on.shadowing = true;
    const RadioEnvironment plain(cells, {true}, RadioParams{}, 3, 4);
    const RadioEnvironment shadowed(cells, {true}, on, 3, 4);
    int differ = 0;
    for (std::uint64_t r = 0; r < 50; ++r) {
        differ += plain.link(r, {0, 700}, 0).path_loss_db != shadowed.link(r, {0, 700}, 0).path_loss_db;
    }
    CHECK(differ == 50);
}

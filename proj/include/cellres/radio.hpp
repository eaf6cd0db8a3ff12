#pragma once

#include "cellres/geo.hpp"
#include "cellres/ingest.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace cellres {

enum class LosState { los, nlos, unresolved };

struct PropagationParams {
    Environment environment = Environment::UMa;
    double bs_height_m = 25.0;
    double ut_height_m = 1.5;
    double carrier_ghz = 2.0;
    LosState los = LosState::unresolved;
};

inline constexpr double kMinLinkDistance = 10.0;
inline constexpr double kSpeedOfLight = 3.0e8;

// TR 38.901 outdoor LOS probability for RMa / UMa (UT below 13 m).
double los_probability(Environment env, double distance_2d_m);

// TR 38.901 RMa / UMa path loss in dB. NLOS is max(LOS, NLOS'). Distances below
// 10 m are evaluated at 10 m. Throws ValidationError outside 0.5-100 GHz, for
// non-positive heights, or when LOS is unresolved.
double path_loss_db(const PropagationParams& params, double distance_2d_m);

// Log-normal shadow fading standard deviation for the link (dB).
double shadowing_sigma_db(const PropagationParams& params, double distance_2d_m);

inline constexpr double kHorizontalBeamwidthDeg = 65.0;
inline constexpr double kMaxSideLobeAttenuationDb = 20.0;

// Horizontal sector pattern A_H(phi) = -min(12 (phi / 65)^2, 20) in dB. Boresight gain
// is already part of the registry EIRP, so this is the whole applied antenna gain.
double horizontal_gain_db(double misalignment_deg);

// Signed angle in [-180, 180] between the sector azimuth (clockwise from north) and the
// bearing from the cell to the target.
double misalignment_deg(double azimuth_deg, Point from, Point to);

struct NoiseModel {
    double thermal_density_dbm_per_hz = -174.0;
    double noise_figure_db = 7.8;

    // N_tot in watts over the bandwidth.
    double power_w(double bandwidth_hz) const;

    friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

struct RadioParams {
    NoiseModel noise;
    double ut_height_m = 1.5;
    double r_max_m = 5000.0;
    std::size_t coordination_k = 3;
    bool shadowing = false;

    friend bool operator==(const RadioParams&, const RadioParams&) = default;
};

struct LinkBudget {
    CellId cell;
    double distance_2d_m = 0.0;
    bool distance_clamped = false;
    bool los = false;
    double path_loss_db = 0.0;
    double gain_db = 0.0;
    double received_power_w = 0.0;
    double interference_w = 0.0;
    double noise_w = 0.0;
    double sinr = 0.0;
    double snr = 0.0;
};

// gamma = S / (N + I), linear. Throws ValidationError for non-positive noise.
double sinr_linear(double signal_w, double noise_w, double interference_w);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// Co-channel cells that interfere with `serving`: active cells on the same center
// frequency within r_max of the serving cell, minus the serving cell and its
// coordination_k nearest co-channel cells. Result holds indices into `cells`, ascending.
std::vector<std::uint32_t> interferer_set(std::span<const Cell> cells,
                                          const std::vector<bool>& active, std::uint32_t serving,
                                          double r_max_m, std::size_t coordination_k);

// Propagation state for one Monte-Carlo run: the active cell set, the per-cell
// interferer sets and the seeds that freeze LOS and shadowing draws per
// (receiver, cell) pair. Cells must be sorted by strictly increasing id.
class RadioEnvironment {
public:
    RadioEnvironment(std::span<const Cell> cells, std::vector<bool> active, RadioParams params,
                     std::uint64_t los_seed, std::uint64_t shadow_seed = 0);

    std::span<const Cell> cells() const noexcept { return cells_; }
    const RadioParams& params() const noexcept { return params_; }
    const std::vector<bool>& active() const noexcept { return active_; }
    bool is_active(std::uint32_t index) const { return active_.at(index); }
    std::uint64_t los_seed() const noexcept { return los_seed_; }

    std::optional<std::uint32_t> index_of(CellId id) const;
    const std::vector<std::uint32_t>& interferers(std::uint32_t serving) const
    {
        return interferers_.at(serving);
    }

    // Same environment and seeds with one more cell switched off.
    RadioEnvironment without(std::uint32_t index) const;

    // Active cell indices within radius of p, ascending.
    std::vector<std::uint32_t> active_within(Point p, double radius) const;

    bool draws_los(std::uint64_t receiver, Point at, std::uint32_t cell) const;
    double received_power_w(std::uint64_t receiver, Point at, std::uint32_t cell) const;
    double interference_w(std::uint64_t receiver, Point at, std::uint32_t serving) const;
    LinkBudget link(std::uint64_t receiver, Point at, std::uint32_t serving) const;

    // Budgets for several serving candidates at one receiver; interferer powers are
    // computed once per cell.
    std::vector<LinkBudget> links(std::uint64_t receiver, Point at,
                                  std::span<const std::uint32_t> serving) const;

private:
    struct Power {
        double watts;
        double distance;
        bool clamped;
        bool los;
        double path_loss;
        double gain;
    };
    Power power_from(std::uint64_t receiver, Point at, std::uint32_t cell) const;

    std::span<const Cell> cells_;
    std::vector<bool> active_;
    RadioParams params_;
    std::uint64_t los_seed_;
    std::uint64_t shadow_seed_;
    std::vector<std::vector<std::uint32_t>> interferers_;
    std::shared_ptr<const SpatialIndex> index_;
};

// W_min = rate / log2(1 + gamma). Throws ValidationError for gamma <= 0.
double min_bandwidth_hz(double rate_bps, double sinr);

// Proportional shares xi_i = W_min_i / sum W_min. Empty input gives an empty result.
// All-zero requirements split evenly.
std::vector<double> allocate_bandwidth(std::span<const double> min_bandwidths_hz);

// C = xi * W * log2(1 + gamma).
double throughput_bps(double share, double bandwidth_hz, double sinr);

} // namespace cellres

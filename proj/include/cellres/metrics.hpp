#pragma once

#include "cellres/association.hpp"
#include "cellres/geo.hpp"
#include "cellres/ingest.hpp"
#include "cellres/radio.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cellres {

struct FlagResult {
    double fraction = 0.0;
    std::vector<std::uint8_t> flags;
    bool empty = false; // no users; fraction reported as 0
};

// delta_fdp = 1 when the user has no serving cell (or its SINR is below gamma_min).
// A user exactly at gamma_min counts as connected.
FlagResult compute_fdp(std::span<const User> users, const AssociationState& association,
                       double gamma_min_linear);

// Per-user throughput after proportional bandwidth sharing in each serving cell.
// Disconnected users get 0.
std::vector<double> user_throughputs(std::span<const User> users,
                                     const AssociationState& association,
                                     std::span<const Cell> cells);

// Throughput >= requirement, with a 1e-12 relative slack for rounding in xi * W * log2(1 + gamma).
bool meets_requirement(double throughput_bps, double requirement_bps) noexcept;

// delta_fsp = 1 when the user is connected and its throughput meets its requirement.
FlagResult compute_fsp(std::span<const User> users, const AssociationState& association,
                       std::span<const double> throughput_bps, double gamma_min_linear);

struct OperatorMetrics {
    std::size_t users = 0;
    std::size_t disconnected = 0;
    std::size_t satisfied = 0;
    double fdp = 0.0;
    double fsp = 0.0;
};

struct MetricsReport {
    double fdp = 0.0;
    double fsp = 0.0;
    std::size_t user_count = 0;
    std::vector<std::uint8_t> disconnected;
    std::vector<std::uint8_t> satisfied;
    std::vector<double> sinr;
    std::vector<double> throughput_bps;
    std::map<OperatorId, OperatorMetrics> per_operator; // by subscription
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

MetricsReport build_report(std::span<const User> users, const AssociationState& association,
                           std::span<const Cell> cells, double gamma_min_linear,
                           std::uint64_t seed);

// Associate, allocate and score one user population on one radio environment.
MetricsReport evaluate_network(const RadioEnvironment& radio, std::span<const User> users,
                               AssociationMode mode, double gamma_min_db,
                               std::uint64_t order_seed);

struct ImportanceDelta {
    double delta_fdp = 0.0;
    double delta_fsp = 0.0;
};

// Removes one cell, re-associates from scratch and returns baseline minus post-failure
// FDP and FSP. Throws ValidationError for an unknown cell id.
ImportanceDelta bs_importance(const RadioEnvironment& radio, std::span<const User> users,
                              AssociationMode mode, double gamma_min_db, std::uint64_t order_seed,
                              const MetricsReport& baseline, CellId cell);

inline constexpr double kCoverageSquareSize = 50.0;

struct CoverageRaster {
    std::string label;
    BoundingBox bounds;
    double square_size_m = kCoverageSquareSize;
    std::size_t columns = 0;
    std::size_t rows = 0;
    std::vector<double> best_sinr_db; // -inf where no candidate cell is in range
    std::vector<std::uint8_t> in_region;
    std::size_t in_region_count = 0;
    // Share of in-region squares with best SINR below gamma_min.
    double below_threshold_fraction = 1.0;

    std::size_t size() const noexcept { return best_sinr_db.size(); }
    Point center(std::size_t square) const noexcept;
};

// Best unloaded SINR at the center of every 50 m square of the region's bounding box.
// `subscription` restricts candidates to one operator; nullopt means roaming.
CoverageRaster coverage_raster(const Region& region, const RadioEnvironment& radio,
                               std::optional<OperatorId> subscription, double gamma_min_db,
                               std::string label, std::size_t threads = 1);

// Empirical CDF over in-region squares: (sinr_db, cumulative fraction) per distinct value.
std::vector<std::pair<double, double>> sinr_ecdf(const CoverageRaster& raster);

} // namespace cellres

#include "cellres/metrics.hpp"

#include "cellres/errors.hpp"
#include "cellres/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace cellres {

namespace {

bool connected(const AssociationState& association, std::size_t u, double gamma_min_linear)
{
    return association.serving[u].has_value() && association.sinr[u] >= gamma_min_linear;
}

void check_sizes(std::span<const User> users, const AssociationState& association)
{
    if (association.serving.size() != users.size() || association.sinr.size() != users.size()) {
        throw ValidationError("association state does not match the user set");
    }
}

} // namespace

FlagResult compute_fdp(std::span<const User> users, const AssociationState& association,
                       double gamma_min_linear)
{
    check_sizes(users, association);
    FlagResult result;
    result.flags.resize(users.size(), 0);
    std::size_t count = 0;
    for (std::size_t u = 0; u < users.size(); ++u) {
        if (!connected(association, u, gamma_min_linear)) {
            result.flags[u] = 1;
            ++count;
        }
    }
    result.empty = users.empty();
    result.fraction =
        users.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(users.size());
    return result;
}

std::vector<double> user_throughputs(std::span<const User> users,
                                     const AssociationState& association,
                                     std::span<const Cell> cells)
{
    check_sizes(users, association);
    std::vector<std::vector<std::size_t>> members(cells.size());
    for (std::size_t u = 0; u < users.size(); ++u) {
        if (association.serving[u]) {
            members.at(*association.serving[u]).push_back(u);
        }
    }
    std::vector<double> throughput(users.size(), 0.0);
    std::vector<double> need;
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if (members[j].empty()) {
            continue;
        }
        need.clear();
        for (std::size_t u : members[j]) {
            need.push_back(min_bandwidth_hz(users[u].rate_requirement_bps, association.sinr[u]));
        }
        const auto shares = allocate_bandwidth(need);
        for (std::size_t k = 0; k < members[j].size(); ++k) {
            const std::size_t u = members[j][k];
            throughput[u] = throughput_bps(shares[k], cells[j].bandwidth_hz, association.sinr[u]);
        }
    }
    return throughput;
}

bool meets_requirement(double throughput_bps, double requirement_bps) noexcept
{
    return throughput_bps >= requirement_bps * (1.0 - 1e-12);
}

FlagResult compute_fsp(std::span<const User> users, const AssociationState& association,
                       std::span<const double> throughput_bps, double gamma_min_linear)
{
    check_sizes(users, association);
    if (throughput_bps.size() != users.size()) {
        throw ValidationError("throughput vector does not match the user set");
    }
    FlagResult result;
    result.flags.resize(users.size(), 0);
    std::size_t count = 0;
    for (std::size_t u = 0; u < users.size(); ++u) {
        if (connected(association, u, gamma_min_linear) &&
            meets_requirement(throughput_bps[u], users[u].rate_requirement_bps)) {
            result.flags[u] = 1;
            ++count;
        }
    }
    result.empty = users.empty();
    result.fraction =
        users.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(users.size());
    return result;
}

MetricsReport build_report(std::span<const User> users, const AssociationState& association,
                           std::span<const Cell> cells, double gamma_min_linear,
                           std::uint64_t seed)
{
    MetricsReport report;
    report.seed = seed;
    report.user_count = users.size();
    report.throughput_bps = user_throughputs(users, association, cells);
    auto fdp = compute_fdp(users, association, gamma_min_linear);
    auto fsp = compute_fsp(users, association, report.throughput_bps, gamma_min_linear);
    report.fdp = fdp.fraction;
    report.fsp = fsp.fraction;
    report.disconnected = std::move(fdp.flags);
    report.satisfied = std::move(fsp.flags);
    report.sinr = association.sinr;
    if (fdp.empty) {
        report.warnings.emplace_back("empty user set: FDP and FSP reported as 0");
    }
    for (std::size_t u = 0; u < users.size(); ++u) {
        if (!users[u].subscription) {
            continue;
        }
        auto& m = report.per_operator[*users[u].subscription];
        ++m.users;
        m.disconnected += report.disconnected[u];
        m.satisfied += report.satisfied[u];
    }
    for (auto& [op, m] : report.per_operator) {
        m.fdp = static_cast<double>(m.disconnected) / static_cast<double>(m.users);
        m.fsp = static_cast<double>(m.satisfied) / static_cast<double>(m.users);
    }
    return report;
}

MetricsReport evaluate_network(const RadioEnvironment& radio, std::span<const User> users,
                               AssociationMode mode, double gamma_min_db,
                               std::uint64_t order_seed)
{
    const double gamma_min = db_to_linear(gamma_min_db);
    const auto association = associate(users, radio, mode, gamma_min, order_seed);
    return build_report(users, association, radio.cells(), gamma_min, radio.los_seed());
}

ImportanceDelta bs_importance(const RadioEnvironment& radio, std::span<const User> users,
                              AssociationMode mode, double gamma_min_db, std::uint64_t order_seed,
                              const MetricsReport& baseline, CellId cell)
{
    const auto index = radio.index_of(cell);
    if (!index) {
        throw ValidationError(fmt::format("unknown cell id {}", cell.value));
    }
    const auto after =
        evaluate_network(radio.without(*index), users, mode, gamma_min_db, order_seed);
    return {baseline.fdp - after.fdp, baseline.fsp - after.fsp};
}

Point CoverageRaster::center(std::size_t square) const noexcept
{
    const std::size_t col = square % columns;
    const std::size_t row = square / columns;
    return {bounds.min_x + (static_cast<double>(col) + 0.5) * square_size_m,
            bounds.min_y + (static_cast<double>(row) + 0.5) * square_size_m};
}

CoverageRaster coverage_raster(const Region& region, const RadioEnvironment& radio,
                               std::optional<OperatorId> subscription, double gamma_min_db,
                               std::string label, std::size_t threads)
{
    CoverageRaster raster;
    raster.label = std::move(label);
    raster.bounds = region.bounds();
    raster.columns = static_cast<std::size_t>(std::ceil(raster.bounds.width() / kCoverageSquareSize));
    raster.rows = static_cast<std::size_t>(std::ceil(raster.bounds.height() / kCoverageSquareSize));
    const std::size_t n = raster.columns * raster.rows;
    raster.best_sinr_db.assign(n, -std::numeric_limits<double>::infinity());
    raster.in_region.assign(n, 0);

    const auto cells = radio.cells();
    parallel_for(n, threads, [&](std::size_t i) {
        const Point probe = raster.center(i);
        raster.in_region[i] = point_in_region(probe, region) ? 1 : 0;
        auto nearby = radio.active_within(probe, radio.params().r_max_m);
        if (subscription) {
            std::erase_if(nearby, [&](std::uint32_t j) { return cells[j].operator_id != *subscription; });
        }
        double best = 0.0;
        for (const auto& b : radio.links(i, probe, nearby)) {
            best = std::max(best, b.sinr);
        }
        if (!nearby.empty()) {
            raster.best_sinr_db[i] = linear_to_db(best);
        }
    });

    std::size_t below = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (raster.in_region[i]) {
            ++raster.in_region_count;
            below += raster.best_sinr_db[i] < gamma_min_db ? 1 : 0;
        }
    }
    raster.below_threshold_fraction =
        raster.in_region_count == 0
            ? 1.0
            : static_cast<double>(below) / static_cast<double>(raster.in_region_count);
    return raster;
}

std::vector<std::pair<double, double>> sinr_ecdf(const CoverageRaster& raster)
{
    std::vector<double> values;
    for (std::size_t i = 0; i < raster.size(); ++i) {
        if (raster.in_region[i]) {
            values.push_back(raster.best_sinr_db[i]);
        }
    }
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> ecdf;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) {
            continue;
        }
        ecdf.emplace_back(values[i], static_cast<double>(i + 1) / n);
    }
    return ecdf;
}

} // namespace cellres

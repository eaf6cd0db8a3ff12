#include "cellres/radio.hpp"

#include "cellres/errors.hpp"
#include "cellres/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include <fmt/core.h>

namespace cellres {

namespace {

constexpr double kCoChannelToleranceMhz = 1e-6;

// RMa defaults: average building height and street width.
constexpr double kRmaBuildingHeight = 5.0;
constexpr double kRmaStreetWidth = 20.0;

double uma_path_loss(const PropagationParams& p, double d2d, double d3d)
{
    const double fc = p.carrier_ghz;
    const double h_e = 1.0;
    const double bp = 4.0 * (p.bs_height_m - h_e) * (p.ut_height_m - h_e) * fc * 1e9 / kSpeedOfLight;
    const double pl1 = 28.0 + 22.0 * std::log10(d3d) + 20.0 * std::log10(fc);
    const double dh = p.bs_height_m - p.ut_height_m;
    const double pl2 = 28.0 + 40.0 * std::log10(d3d) + 20.0 * std::log10(fc) -
                       9.0 * std::log10(bp * bp + dh * dh);
    const double los = d2d <= bp ? pl1 : pl2;
    if (p.los == LosState::los) {
        return los;
    }
    const double nlos = 13.54 + 39.08 * std::log10(d3d) + 20.0 * std::log10(fc) -
                        0.6 * (p.ut_height_m - 1.5);
    return std::max(los, nlos);
}

double rma_pl1(double d3d, double fc)
{
    const double h = kRmaBuildingHeight;
    const double hp = std::pow(h, 1.72);
    return 20.0 * std::log10(40.0 * std::numbers::pi * d3d * fc / 3.0) +
           std::min(0.03 * hp, 10.0) * std::log10(d3d) - std::min(0.044 * hp, 14.77) +
           0.002 * std::log10(h) * d3d;
}

double rma_breakpoint(const PropagationParams& p)
{
    return 2.0 * std::numbers::pi * p.bs_height_m * p.ut_height_m * p.carrier_ghz * 1e9 /
           kSpeedOfLight;
}

double rma_path_loss(const PropagationParams& p, double d2d, double d3d)
{
    const double fc = p.carrier_ghz;
    const double bp = rma_breakpoint(p);
    const double los = d2d <= bp ? rma_pl1(d3d, fc) : rma_pl1(bp, fc) + 40.0 * std::log10(d3d / bp);
    if (p.los == LosState::los) {
        return los;
    }
    const double h = kRmaBuildingHeight;
    const double w = kRmaStreetWidth;
    const double hbs = p.bs_height_m;
    const double hut = p.ut_height_m;
    const double log_hut = std::log10(11.75 * hut);
    const double nlos = 161.04 - 7.1 * std::log10(w) + 7.5 * std::log10(h) -
                        (24.37 - 3.7 * (h / hbs) * (h / hbs)) * std::log10(hbs) +
                        (43.42 - 3.1 * std::log10(hbs)) * (std::log10(d3d) - 3.0) +
                        20.0 * std::log10(fc) - (3.2 * log_hut * log_hut - 4.97);
    return std::max(los, nlos);
}

void check_propagation(const PropagationParams& p)
{
    if (!(p.carrier_ghz >= 0.5 && p.carrier_ghz <= 100.0)) {
        throw ValidationError(
            fmt::format("carrier {} GHz outside the 0.5-100 GHz model range", p.carrier_ghz));
    }
    if (!(p.bs_height_m > 0.0) || !(p.ut_height_m > 0.0)) {
        throw ValidationError("antenna heights must be positive");
    }
    if (p.los == LosState::unresolved) {
        throw ValidationError("path loss needs a resolved LOS state");
    }
}

bool co_channel(const Cell& a, const Cell& b) noexcept
{
    return std::abs(a.frequency_mhz - b.frequency_mhz) <= kCoChannelToleranceMhz;
}

// Interferers of `serving` among the given co-channel group (indices into cells).
std::vector<std::uint32_t> interferers_in_group(std::span<const Cell> cells,
                                                std::span<const std::uint32_t> group,
                                                std::uint32_t serving, double r_max_m,
                                                std::size_t coordination_k)
{
    struct Neighbour {
        double distance;
        CellId id;
        std::uint32_t index;
    };
    std::vector<Neighbour> neighbours;
    for (std::uint32_t m : group) {
        if (m == serving) {
            continue;
        }
        neighbours.push_back({distance(cells[serving].position, cells[m].position), cells[m].id, m});
    }
    std::sort(neighbours.begin(), neighbours.end(), [](const Neighbour& a, const Neighbour& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    });
    std::vector<std::uint32_t> out;
    for (std::size_t i = coordination_k; i < neighbours.size(); ++i) {
        if (neighbours[i].distance <= r_max_m) {
            out.push_back(neighbours[i].index);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

double los_probability(Environment env, double distance_2d_m)
{
    if (!(distance_2d_m >= 0.0)) {
        throw ValidationError("distance must be >= 0");
    }
    const double d = distance_2d_m;
    if (env == Environment::RMa) {
        return d <= 10.0 ? 1.0 : std::exp(-(d - 10.0) / 1000.0);
    }
    return d <= 18.0 ? 1.0 : 18.0 / d + std::exp(-d / 63.0) * (1.0 - 18.0 / d);
}

double path_loss_db(const PropagationParams& params, double distance_2d_m)
{
    check_propagation(params);
    if (!(distance_2d_m >= 0.0)) {
        throw ValidationError("distance must be >= 0");
    }
    const double d2d = std::max(distance_2d_m, kMinLinkDistance);
    const double dh = params.bs_height_m - params.ut_height_m;
    const double d3d = std::sqrt(d2d * d2d + dh * dh);
    return params.environment == Environment::UMa ? uma_path_loss(params, d2d, d3d)
                                                   : rma_path_loss(params, d2d, d3d);
}

double shadowing_sigma_db(const PropagationParams& params, double distance_2d_m)
{
    const bool los = params.los == LosState::los;
    if (params.environment == Environment::UMa) {
        return los ? 4.0 : 6.0;
    }
    if (!los) {
        return 8.0;
    }
    return std::max(distance_2d_m, kMinLinkDistance) <= rma_breakpoint(params) ? 4.0 : 6.0;
}

double horizontal_gain_db(double misalignment_deg)
{
    const double ratio = misalignment_deg / kHorizontalBeamwidthDeg;
    return -std::min(12.0 * ratio * ratio, kMaxSideLobeAttenuationDb);
}

double misalignment_deg(double azimuth_deg, Point from, Point to)
{
    const double bearing = std::atan2(to.x - from.x, to.y - from.y) * 180.0 / std::numbers::pi;
    double phi = std::fmod(bearing - azimuth_deg, 360.0);
    if (phi > 180.0) {
        phi -= 360.0;
    } else if (phi < -180.0) {
        phi += 360.0;
    }
    return phi;
}

double NoiseModel::power_w(double bandwidth_hz) const
{
    const double density_w_per_hz = std::pow(10.0, (thermal_density_dbm_per_hz - 30.0) / 10.0);
    const double power = density_w_per_hz * bandwidth_hz * std::pow(10.0, noise_figure_db / 10.0);
    if (!(power > 0.0) || !std::isfinite(power)) {
        throw ValidationError(fmt::format("noise power over {} Hz is not positive", bandwidth_hz));
    }
    return power;
}

double sinr_linear(double signal_w, double noise_w, double interference_w)
{
    if (!(noise_w > 0.0)) {
        throw ValidationError("noise power must be positive");
    }
    return signal_w / (noise_w + interference_w);
}

std::vector<std::uint32_t> interferer_set(std::span<const Cell> cells,
                                          const std::vector<bool>& active, std::uint32_t serving,
                                          double r_max_m, std::size_t coordination_k)
{
    if (serving >= cells.size()) {
        throw ValidationError("serving cell index out of range");
    }
    std::vector<std::uint32_t> group;
    for (std::uint32_t m = 0; m < cells.size(); ++m) {
        if (active.at(m) && co_channel(cells[m], cells[serving])) {
            group.push_back(m);
        }
    }
    return interferers_in_group(cells, group, serving, r_max_m, coordination_k);
}

RadioEnvironment::RadioEnvironment(std::span<const Cell> cells, std::vector<bool> active,
                                   RadioParams params, std::uint64_t los_seed,
                                   std::uint64_t shadow_seed)
    : cells_(cells), active_(std::move(active)), params_(params), los_seed_(los_seed),
      shadow_seed_(shadow_seed)
{
    if (active_.size() != cells_.size()) {
        throw ValidationError("active mask must have one entry per cell");
    }
    for (std::size_t i = 1; i < cells_.size(); ++i) {
        if (!(cells_[i - 1].id < cells_[i].id)) {
            throw ValidationError("cells must be sorted by strictly increasing id");
        }
    }
    std::vector<Point> positions;
    positions.reserve(cells_.size());
    for (const auto& c : cells_) {
        positions.push_back(c.position);
    }
    index_ = std::make_shared<SpatialIndex>(positions, std::max(params_.r_max_m / 4.0, 250.0));

    interferers_.assign(cells_.size(), {});
    std::vector<std::uint32_t> order;
    for (std::uint32_t i = 0; i < cells_.size(); ++i) {
        if (active_[i]) {
            order.push_back(i);
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return cells_[a].frequency_mhz < cells_[b].frequency_mhz;
    });
    std::size_t begin = 0;
    while (begin < order.size()) {
        std::size_t end = begin + 1;
        while (end < order.size() && co_channel(cells_[order[begin]], cells_[order[end]])) {
            ++end;
        }
        std::vector<std::uint32_t> group(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
        std::sort(group.begin(), group.end());
        for (std::uint32_t j : group) {
            interferers_[j] =
                interferers_in_group(cells_, group, j, params_.r_max_m, params_.coordination_k);
        }
        begin = end;
    }
}

std::optional<std::uint32_t> RadioEnvironment::index_of(CellId id) const
{
    const auto it = std::lower_bound(cells_.begin(), cells_.end(), id,
                                     [](const Cell& c, CellId v) { return c.id < v; });
    if (it == cells_.end() || it->id != id) {
        return std::nullopt;
    }
    return static_cast<std::uint32_t>(it - cells_.begin());
}

RadioEnvironment RadioEnvironment::without(std::uint32_t index) const
{
    std::vector<bool> active = active_;
    active.at(index) = false;
    return RadioEnvironment(cells_, std::move(active), params_, los_seed_, shadow_seed_);
}

std::vector<std::uint32_t> RadioEnvironment::active_within(Point p, double radius) const
{
    auto found = index_->within(p, radius);
    std::erase_if(found, [&](std::uint32_t i) { return !active_[i]; });
    return found;
}

RadioEnvironment::Power RadioEnvironment::power_from(std::uint64_t receiver, Point at,
                                                     std::uint32_t index) const
{
    const Cell& cell = cells_[index];
    const double raw = distance(cell.position, at);
    const double d2d = std::max(raw, kMinLinkDistance);
    const bool los =
        hashed_uniform(los_seed_, receiver, cell.id.value) < los_probability(cell.environment, d2d);

    PropagationParams prop;
    prop.environment = cell.environment;
    prop.bs_height_m = cell.height_m;
    prop.ut_height_m = params_.ut_height_m;
    prop.carrier_ghz = cell.frequency_mhz / 1000.0;
    prop.los = los ? LosState::los : LosState::nlos;
    double loss = path_loss_db(prop, d2d);
    if (params_.shadowing) {
        loss += shadowing_sigma_db(prop, d2d) * hashed_normal(shadow_seed_, receiver, cell.id.value);
    }
    const double gain = horizontal_gain_db(misalignment_deg(cell.azimuth_deg, cell.position, at));
    const double watts = cell.tx_power_w * db_to_linear(gain) / db_to_linear(loss);
    return {watts, raw, raw < kMinLinkDistance, los, loss, gain};
}

bool RadioEnvironment::draws_los(std::uint64_t receiver, Point at, std::uint32_t cell) const
{
    return power_from(receiver, at, cell).los;
}

double RadioEnvironment::received_power_w(std::uint64_t receiver, Point at,
                                          std::uint32_t cell) const
{
    return power_from(receiver, at, cell).watts;
}

double RadioEnvironment::interference_w(std::uint64_t receiver, Point at,
                                        std::uint32_t serving) const
{
    double total = 0.0;
    for (std::uint32_t m : interferers_.at(serving)) {
        total += power_from(receiver, at, m).watts;
    }
    return total;
}

LinkBudget RadioEnvironment::link(std::uint64_t receiver, Point at, std::uint32_t serving) const
{
    const std::uint32_t one[] = {serving};
    return links(receiver, at, one).front();
}

std::vector<LinkBudget> RadioEnvironment::links(std::uint64_t receiver, Point at,
                                                std::span<const std::uint32_t> serving) const
{
    std::unordered_map<std::uint32_t, double> cache;
    auto power = [&](std::uint32_t m) {
        const auto it = cache.find(m);
        if (it != cache.end()) {
            return it->second;
        }
        const double w = power_from(receiver, at, m).watts;
        cache.emplace(m, w);
        return w;
    };

    std::vector<LinkBudget> out;
    out.reserve(serving.size());
    for (std::uint32_t j : serving) {
        const Power signal = power_from(receiver, at, j);
        cache.emplace(j, signal.watts);
        LinkBudget b;
        b.cell = cells_[j].id;
        b.distance_2d_m = signal.distance;
        b.distance_clamped = signal.clamped;
        b.los = signal.los;
        b.path_loss_db = signal.path_loss;
        b.gain_db = signal.gain;
        b.received_power_w = signal.watts;
        for (std::uint32_t m : interferers_.at(j)) {
            b.interference_w += power(m);
        }
        b.noise_w = params_.noise.power_w(cells_[j].bandwidth_hz);
        b.sinr = sinr_linear(b.received_power_w, b.noise_w, b.interference_w);
        b.snr = sinr_linear(b.received_power_w, b.noise_w, 0.0);
        out.push_back(b);
    }
    return out;
}

double min_bandwidth_hz(double rate_bps, double sinr)
{
    if (!(sinr > 0.0)) {
        throw ValidationError("minimum bandwidth is undefined for SINR <= 0");
    }
    return rate_bps / std::log2(1.0 + sinr);
}

std::vector<double> allocate_bandwidth(std::span<const double> min_bandwidths_hz)
{
    std::vector<double> shares(min_bandwidths_hz.size(), 0.0);
    if (shares.empty()) {
        return shares;
    }
    double total = 0.0;
    for (double w : min_bandwidths_hz) {
        if (!(w >= 0.0)) {
            throw ValidationError("minimum bandwidth must be >= 0");
        }
        total += w;
    }
    for (std::size_t i = 0; i < shares.size(); ++i) {
        shares[i] = total > 0.0 ? min_bandwidths_hz[i] / total
                                : 1.0 / static_cast<double>(shares.size());
    }
    return shares;
}

double throughput_bps(double share, double bandwidth_hz, double sinr)
{
    return share * bandwidth_hz * std::log2(1.0 + sinr);
}

} // namespace cellres

#include "cellres/geo.hpp"

#include "cellres/errors.hpp"
#include "cellres/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/core.h>

namespace cellres {

namespace {

double cross(Point o, Point a, Point b) noexcept
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double segment_distance(Point p, Point a, Point b) noexcept
{
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    }
    return distance(p, {a.x + t * dx, a.y + t * dy});
}

bool on_segment(Point p, Point a, Point b) noexcept
{
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

int orientation(Point a, Point b, Point c) noexcept
{
    const double v = cross(a, b, c);
    return (v > 0.0) - (v < 0.0);
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) noexcept
{
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) {
        return true;
    }
    return (o1 == 0 && on_segment(q1, p1, p2)) || (o2 == 0 && on_segment(q2, p1, p2)) ||
           (o3 == 0 && on_segment(p1, q1, q2)) || (o4 == 0 && on_segment(p2, q1, q2));
}

double signed_area(const std::vector<Point>& ring) noexcept
{
    double twice = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point a = ring[i];
        const Point b = ring[(i + 1) % ring.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return twice / 2.0;
}

} // namespace

double distance(Point a, Point b) noexcept
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

Region::Region(std::string id, std::vector<Point> boundary)
    : id_(std::move(id)), boundary_(std::move(boundary))
{
    if (boundary_.size() > 1 && boundary_.front() == boundary_.back()) {
        boundary_.pop_back();
    }
    if (boundary_.size() < 3) {
        throw ValidationError(fmt::format("region '{}': polygon needs at least 3 vertices, got {}",
                                          id_, boundary_.size()));
    }
    for (const Point& p : boundary_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw ValidationError(fmt::format("region '{}': non-finite vertex", id_));
        }
    }
    const std::size_t n = boundary_.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) {
                continue;
            }
            if (segments_intersect(boundary_[i], boundary_[(i + 1) % n], boundary_[j],
                                   boundary_[(j + 1) % n])) {
                throw ValidationError(
                    fmt::format("region '{}': boundary self-intersects at edges {} and {}", id_, i, j));
            }
        }
    }

    const double a = signed_area(boundary_);
    if (a == 0.0) {
        throw ValidationError(fmt::format("region '{}': polygon has zero area", id_));
    }
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point p = boundary_[i];
        const Point q = boundary_[(i + 1) % n];
        const double w = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    centroid_ = {cx / (6.0 * a), cy / (6.0 * a)};

    bounds_ = {boundary_[0].x, boundary_[0].y, boundary_[0].x, boundary_[0].y};
    for (const Point& p : boundary_) {
        bounds_.min_x = std::min(bounds_.min_x, p.x);
        bounds_.min_y = std::min(bounds_.min_y, p.y);
        bounds_.max_x = std::max(bounds_.max_x, p.x);
        bounds_.max_y = std::max(bounds_.max_y, p.y);
    }
}

double Region::area() const noexcept
{
    return std::abs(signed_area(boundary_));
}

double Region::distance_to_boundary(Point p) const noexcept
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < boundary_.size(); ++i) {
        best = std::min(best,
                        segment_distance(p, boundary_[i], boundary_[(i + 1) % boundary_.size()]));
    }
    return best;
}

bool point_in_region(Point p, const Region& region)
{
    const auto& ring = region.boundary();
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = ring[i];
        const Point b = ring[(i + 1) % n];
        if (cross(a, b, p) == 0.0 && on_segment(p, a, b)) {
            return true;
        }
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point a = ring[i];
        const Point b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_at = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x_at) {
                inside = !inside;
            }
        }
    }
    return inside;
}

bool PopulationCell::contains(Point p) const noexcept
{
    return p.x >= origin.x && p.x <= origin.x + size && p.y >= origin.y && p.y <= origin.y + size;
}

void validate(const PopulationCell& cell)
{
    if (!(cell.population >= 0.0) || !std::isfinite(cell.population)) {
        throw ValidationError(fmt::format("population cell at ({}, {}): population must be >= 0",
                                          cell.origin.x, cell.origin.y));
    }
    if (cell.urbanity < 1 || cell.urbanity > 5) {
        throw ValidationError(fmt::format("population cell at ({}, {}): urbanity {} not in 1..5",
                                          cell.origin.x, cell.origin.y, cell.urbanity));
    }
    if (!std::isfinite(cell.origin.x) || !std::isfinite(cell.origin.y)) {
        throw ValidationError("population cell origin is not finite");
    }
}

SamplingParams SamplingParams::equal_split(std::vector<OperatorId> operators,
                                           double active_fraction, double rate_min_bps,
                                           double rate_max_bps)
{
    SamplingParams params;
    params.active_fraction = active_fraction;
    params.rate_min_bps = rate_min_bps;
    params.rate_max_bps = rate_max_bps;
    params.split.assign(operators.size(),
                        operators.empty() ? 0.0 : 1.0 / static_cast<double>(operators.size()));
    params.operators = std::move(operators);
    return params;
}

void validate(const SamplingParams& params)
{
    if (!(params.active_fraction >= 0.0 && params.active_fraction <= 1.0)) {
        throw ValidationError(
            fmt::format("active fraction {} outside [0, 1]", params.active_fraction));
    }
    if (!(params.rate_min_bps >= 0.0) || !(params.rate_min_bps <= params.rate_max_bps)) {
        throw ValidationError(fmt::format("rate band [{}, {}] is invalid", params.rate_min_bps,
                                          params.rate_max_bps));
    }
    if (params.split.size() != params.operators.size()) {
        throw ValidationError("operator split must have one fraction per operator");
    }
    if (!params.operators.empty()) {
        double total = 0.0;
        for (double f : params.split) {
            if (!(f >= 0.0)) {
                throw ValidationError("operator split fractions must be non-negative");
            }
            total += f;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw ValidationError(fmt::format("operator split sums to {}, expected 1", total));
        }
    }
}

namespace {

void draw_cell_users(const PopulationCell& cell, std::uint32_t cell_index, double intensity,
                     const SamplingParams& params, std::uint64_t cell_seed,
                     std::uint32_t& next_id, std::vector<User>& out)
{
    if (intensity <= 0.0) {
        return;
    }
    std::mt19937_64 rng(cell_seed);
    std::poisson_distribution<std::int64_t> count_dist(intensity);
    const std::int64_t count = count_dist(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::int64_t k = 0; k < count; ++k) {
        User user;
        user.id = next_id++;
        user.source_cell = cell_index;
        user.position = {cell.origin.x + unit(rng) * cell.size, cell.origin.y + unit(rng) * cell.size};
        if (!params.operators.empty()) {
            const double u = unit(rng);
            double acc = 0.0;
            std::size_t pick = params.operators.size() - 1;
            for (std::size_t i = 0; i < params.split.size(); ++i) {
                acc += params.split[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
            user.subscription = params.operators[pick];
        }
        const double r = unit(rng);
        user.rate_requirement_bps =
            params.rate_min_bps + r * (params.rate_max_bps - params.rate_min_bps);
        out.push_back(user);
    }
}

UserSet sample_scaled(std::span<const PopulationCell> cells, const SamplingParams& params,
                      double scale, std::uint64_t seed, Stream stream, std::uint32_t first_id)
{
    validate(params);
    for (const auto& cell : cells) {
        validate(cell);
    }
    UserSet result;
    std::uint32_t next_id = first_id;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double intensity = cells[i].population * params.active_fraction * scale;
        draw_cell_users(cells[i], static_cast<std::uint32_t>(i), intensity, params,
                        derive_seed(seed, i, stream), next_id, result.users);
    }
    return result;
}

} // namespace

UserSet sample_users(std::span<const PopulationCell> cells, const SamplingParams& params,
                     std::uint64_t seed)
{
    return sample_scaled(cells, params, 1.0, seed, Stream::users, 0);
}

UserSet scale_users(const UserSet& users, std::span<const PopulationCell> cells,
                    const SamplingParams& params, double p_pop_percent, std::uint64_t seed)
{
    if (!(p_pop_percent >= 0.0)) {
        throw ValidationError(fmt::format("p_pop {} must be >= 0", p_pop_percent));
    }
    UserSet result = users;
    if (p_pop_percent == 0.0) {
        return result;
    }
    std::uint32_t first_id = 0;
    for (const User& u : users.users) {
        first_id = std::max(first_id, u.id + 1);
    }
    UserSet extra =
        sample_scaled(cells, params, p_pop_percent / 100.0, seed, Stream::surge, first_id);
    result.users.insert(result.users.end(), extra.users.begin(), extra.users.end());
    return result;
}

Point Projection::project(double lat_deg, double lon_deg) const noexcept
{
    constexpr double kEarthRadius = 6371008.8;
    constexpr double kDeg = std::numbers::pi / 180.0;
    const double x = kEarthRadius * std::cos(origin_lat_deg * kDeg) * (lon_deg - origin_lon_deg) * kDeg;
    const double y = kEarthRadius * (lat_deg - origin_lat_deg) * kDeg;
    return {false_easting_m + x, false_northing_m + y};
}

SpatialIndex::SpatialIndex(std::span<const Point> points, double bucket_size)
    : points_(points.begin(), points.end()), bucket_size_(bucket_size)
{
    if (!(bucket_size_ > 0.0)) {
        throw ValidationError("spatial index bucket size must be positive");
    }
    entries_.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        entries_.emplace_back(key_for(points_[i]), static_cast<std::uint32_t>(i));
    }
    std::sort(entries_.begin(), entries_.end());
}

SpatialIndex::Key SpatialIndex::key_for(Point p) const noexcept
{
    return {static_cast<std::int64_t>(std::floor(p.x / bucket_size_)),
            static_cast<std::int64_t>(std::floor(p.y / bucket_size_))};
}

std::vector<std::uint32_t> SpatialIndex::within(Point p, double radius) const
{
    std::vector<std::uint32_t> out;
    if (!std::isfinite(radius) || radius / bucket_size_ > 4096.0) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (distance(points_[i], p) <= radius) {
                out.push_back(static_cast<std::uint32_t>(i));
            }
        }
        return out;
    }
    const Key lo = key_for({p.x - radius, p.y - radius});
    const Key hi = key_for({p.x + radius, p.y + radius});
    for (std::int64_t ix = lo.ix; ix <= hi.ix; ++ix) {
        auto it = std::lower_bound(entries_.begin(), entries_.end(),
                                   std::pair<Key, std::uint32_t>{{ix, lo.iy}, 0});
        for (; it != entries_.end() && it->first.ix == ix && it->first.iy <= hi.iy; ++it) {
            if (distance(points_[it->second], p) <= radius) {
                out.push_back(it->second);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace cellres

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cellres {

// Planar coordinates in meters (x east, y north).
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b) noexcept;

struct BoundingBox {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    double width() const noexcept { return max_x - min_x; }
    double height() const noexcept { return max_y - min_y; }
};

// Simple closed polygon. The closing vertex is implicit; a repeated first vertex
// at the end of the input is dropped.
class Region {
public:
    Region(std::string id, std::vector<Point> boundary);

    const std::string& id() const noexcept { return id_; }
    const std::vector<Point>& boundary() const noexcept { return boundary_; }
    Point centroid() const noexcept { return centroid_; }
    const BoundingBox& bounds() const noexcept { return bounds_; }
    double area() const noexcept;

    // Distance from p to the nearest boundary edge (zero on the boundary).
    double distance_to_boundary(Point p) const noexcept;

private:
    std::string id_;
    std::vector<Point> boundary_;
    Point centroid_;
    BoundingBox bounds_;
};

// Boundary points count as inside.
bool point_in_region(Point p, const Region& region);

inline constexpr double kPopulationCellSize = 500.0;

struct PopulationCell {
    Point origin; // southwest corner
    double size = kPopulationCellSize;
    double population = 0.0;
    int urbanity = 5;

    Point center() const noexcept { return {origin.x + size / 2.0, origin.y + size / 2.0}; }
    bool contains(Point p) const noexcept;
};

void validate(const PopulationCell& cell);

struct OperatorId {
    std::uint16_t value = 0;

    friend auto operator<=>(const OperatorId&, const OperatorId&) = default;
};

struct User {
    std::uint32_t id = 0;
    Point position;
    // nullopt means the user may attach to any operator.
    std::optional<OperatorId> subscription;
    double rate_requirement_bps = 0.0;
    std::uint32_t source_cell = 0;

    friend bool operator==(const User&, const User&) = default;
};

struct UserSet {
    std::vector<User> users;

    std::size_t size() const noexcept { return users.size(); }
    bool empty() const noexcept { return users.empty(); }
    friend bool operator==(const UserSet&, const UserSet&) = default;
};

struct SamplingParams {
    double active_fraction = 0.02;
    double rate_min_bps = 8e6;
    double rate_max_bps = 20e6;
    // Empty operator list samples ROAMING-ANY users.
    std::vector<OperatorId> operators;
    std::vector<double> split;

    // Equal split across operators.
    static SamplingParams equal_split(std::vector<OperatorId> operators, double active_fraction,
                                      double rate_min_bps, double rate_max_bps);
};

void validate(const SamplingParams& params);

// Poisson point process: per cell, count ~ Poisson(population * f_p), positions uniform
// inside the cell, operator by split, rate requirement uniform in the rate band.
UserSet sample_users(std::span<const PopulationCell> cells, const SamplingParams& params,
                     std::uint64_t seed);

// Adds users drawn by the same process with intensity scaled by p_pop / 100. Original
// users are kept unchanged and new users get ids after the existing maximum.
UserSet scale_users(const UserSet& users, std::span<const PopulationCell> cells,
                    const SamplingParams& params, double p_pop_percent, std::uint64_t seed);

// Local tangent-plane (equirectangular) projection of geographic coordinates.
struct Projection {
    double origin_lat_deg = 0.0;
    double origin_lon_deg = 0.0;
    double false_easting_m = 0.0;
    double false_northing_m = 0.0;

    Point project(double lat_deg, double lon_deg) const noexcept;
    friend bool operator==(const Projection&, const Projection&) = default;
};

// Bucketed point index for radius queries.
class SpatialIndex {
public:
    SpatialIndex(std::span<const Point> points, double bucket_size);

    // Indices of points within radius of p (inclusive), ascending.
    std::vector<std::uint32_t> within(Point p, double radius) const;

private:
    struct Key {
        std::int64_t ix;
        std::int64_t iy;
        friend auto operator<=>(const Key&, const Key&) = default;
    };
    Key key_for(Point p) const noexcept;

    std::vector<Point> points_;
    double bucket_size_;
    std::vector<std::pair<Key, std::uint32_t>> entries_; // sorted by key
};

} // namespace cellres

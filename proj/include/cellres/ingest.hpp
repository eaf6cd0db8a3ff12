#pragma once

#include "cellres/errors.hpp"
#include "cellres/geo.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cellres {

enum class Technology { g2, g3, g4, g5 };

std::optional<Technology> parse_technology(std::string_view text);
std::string_view to_string(Technology tech);

enum class Environment { UMa, RMa };

std::string_view to_string(Environment env);

struct GeoCoord {
    double lat_deg = 0.0;
    double lon_deg = 0.0;

    friend bool operator==(const GeoCoord&, const GeoCoord&) = default;
};

// One row of an antenna registry.
struct RawAntennaRecord {
    std::string site_id;
    std::string operator_hint;
    std::optional<GeoCoord> geographic;
    std::optional<Point> planar;
    double height_m = 0.0;
    std::optional<double> azimuth_deg; // nullopt for OMNI
    double frequency_mhz = 0.0;
    double bandwidth_mhz = 0.0;
    double eirp_dbw = 0.0;
    Technology technology = Technology::g4;
    std::size_t line = 0;

    bool omnidirectional() const noexcept { return !azimuth_deg.has_value(); }
    friend bool operator==(const RawAntennaRecord&, const RawAntennaRecord&) = default;
};

struct AntennaParseResult {
    std::vector<RawAntennaRecord> records;
    std::vector<RowError> errors;
};

// Header must be exactly
//   site_id,operator,lat,lon,height_m,azimuth_deg,frequency_mhz,bandwidth_mhz,eirp_dbw,technology
// or the same with x_m,y_m in place of lat,lon. Throws SchemaError on a bad header.
AntennaParseResult parse_antenna_csv(std::istream& in);
AntennaParseResult parse_antenna_csv(const std::filesystem::path& path);

// Inverse of parse_antenna_csv. All records must use the same coordinate kind.
std::string format_antenna_csv(std::span<const RawAntennaRecord> records);

struct FilterReport {
    std::size_t removed_2g = 0;
    std::size_t removed_omni = 0;
};

struct FilterResult {
    std::vector<RawAntennaRecord> records;
    FilterReport report;
};

// Drops 2G rows and omnidirectional rows. A 2G OMNI row is counted as 2G.
FilterResult filter_records(std::vector<RawAntennaRecord> records);

struct Carrier {
    double center_mhz = 0.0;
    double bandwidth_mhz = 0.0;
    Technology technology = Technology::g4;

    double lower_mhz() const noexcept { return center_mhz - bandwidth_mhz / 2.0; }
    double upper_mhz() const noexcept { return center_mhz + bandwidth_mhz / 2.0; }
    bool contains(double frequency_mhz) const noexcept
    {
        return frequency_mhz >= lower_mhz() && frequency_mhz <= upper_mhz();
    }
};

// Spectrum holdings per operator. Carriers of different operators may touch at
// their edges but must not overlap.
class OperatorSpectrum {
public:
    OperatorSpectrum() = default;
    OperatorSpectrum(std::vector<std::string> names, std::vector<std::vector<Carrier>> carriers);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(OperatorId op) const { return names_.at(op.value); }
    std::optional<OperatorId> find(std::string_view name) const;
    const std::vector<Carrier>& carriers(OperatorId op) const { return carriers_.at(op.value); }
    std::vector<OperatorId> operators() const;

    // Owner of the carrier containing the frequency, nearest center first.
    // nullopt when nothing contains it; throws UnassignedOperatorError when two
    // operators' carriers are equally close.
    std::optional<OperatorId> owner_of(double frequency_mhz) const;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<Carrier>> carriers_;
};

// JSON object: operator -> technology -> [[center_mhz, bandwidth_mhz], ...]. Operator
// order follows the document.
OperatorSpectrum parse_spectrum_json(std::string_view text);
OperatorSpectrum load_spectrum(const std::filesystem::path& path);

// Throws UnassignedOperatorError when no carrier matches or an operator hint
// contradicts spectrum ownership.
OperatorId assign_operator(const RawAntennaRecord& record, const OperatorSpectrum& spectrum);

class PopulationGrid {
public:
    explicit PopulationGrid(std::vector<PopulationCell> cells);

    const std::vector<PopulationCell>& cells() const noexcept { return cells_; }
    bool empty() const noexcept { return cells_.empty(); }

    const PopulationCell* locate(Point p) const;
    const PopulationCell& nearest(Point p) const;

    // Cells whose center lies inside the region.
    std::vector<PopulationCell> within(const Region& region) const;

private:
    std::vector<PopulationCell> cells_;
    Point anchor_;
    std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, std::size_t>> lattice_;
};

// Header exactly: cell_x_m,cell_y_m,population,urbanity
PopulationGrid parse_population_csv(std::istream& in);
PopulationGrid load_population(const std::filesystem::path& path);

struct EnvironmentClass {
    Environment environment = Environment::UMa;
    bool from_nearest = false; // position was outside the grid
};

// Urbanity 1-3 is urban macro, 4-5 rural macro.
Environment environment_for_urbanity(int urbanity);
EnvironmentClass classify_environment(Point position, const PopulationGrid& grid);

enum class RegionCrs { planar, geographic };

// GeoJSON Polygon (bare, Feature, or first feature of a FeatureCollection) with a single ring.
// Geographic coordinates are [lon, lat] and are projected with the given projection.
Region parse_region_geojson(std::string_view text, std::string id, RegionCrs crs,
                            const std::optional<Projection>& projection);
// Vertex list with header x_m,y_m.
Region parse_region_csv(std::istream& in, std::string id);
Region load_region(const std::filesystem::path& path, std::string id, RegionCrs crs,
                   const std::optional<Projection>& projection);

// Projection anchored at the centroid of a geographic GeoJSON polygon.
Projection projection_at_geojson_centroid(std::string_view text);

struct CellId {
    std::uint32_t value = 0;

    friend auto operator<=>(const CellId&, const CellId&) = default;
};

// One transmitting sector-carrier.
struct Cell {
    CellId id;
    std::string site_id;
    OperatorId operator_id;
    Point position;
    double height_m = 25.0;
    double azimuth_deg = 0.0;
    double frequency_mhz = 0.0;
    double bandwidth_hz = 0.0;
    double tx_power_w = 0.0; // derated EIRP, boresight gain included
    Environment environment = Environment::UMa;
    bool in_region = false;
    bool border_margin = false;
};

inline constexpr double kPowerDerating = 0.9;

// Linear transmit power after derating the registry EIRP.
double derated_power_w(double eirp_dbw) noexcept;

struct CellBuildResult {
    std::vector<Cell> cells;
    std::vector<RowError> quarantined;
    std::vector<std::string> warnings;
};

// Assigns operators, projects coordinates and classifies environments. Rows that
// cannot be assigned are quarantined. Cell ids follow record order.
CellBuildResult build_cells(std::span<const RawAntennaRecord> records,
                            const OperatorSpectrum& spectrum, const PopulationGrid& grid,
                            const std::optional<Projection>& projection);

// Keeps cells inside the region (in_region) or within margin of its boundary
// (border_margin). Ids are preserved.
std::vector<Cell> select_cells_for_region(std::vector<Cell> cells, const Region& region,
                                          double margin_m = 2000.0);

} // namespace cellres

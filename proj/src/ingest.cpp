#include "cellres/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

namespace cellres {

namespace {

using ordered_json = nlohmann::ordered_json;

const std::vector<std::string> kGeographicHeader = {
    "site_id",       "operator",      "lat",      "lon",       "height_m",
    "azimuth_deg",   "frequency_mhz", "bandwidth_mhz", "eirp_dbw", "technology"};
const std::vector<std::string> kPlanarHeader = {
    "site_id",       "operator",      "x_m",      "y_m",       "height_m",
    "azimuth_deg",   "frequency_mhz", "bandwidth_mhz", "eirp_dbw", "technology"};
const std::vector<std::string> kPopulationHeader = {"cell_x_m", "cell_y_m", "population",
                                                    "urbanity"};

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

bool read_line(std::istream& in, std::string& line)
{
    if (!std::getline(in, line)) {
        return false;
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return true;
}

std::optional<double> parse_double(std::string_view text)
{
    text = trim(text);
    if (text.empty()) {
        return std::nullopt;
    }
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

double require_double(std::string_view text, std::string_view column)
{
    const auto value = parse_double(text);
    if (!value) {
        throw ValidationError(fmt::format("column '{}': cannot parse number '{}'", column, text));
    }
    return *value;
}

std::string quote_if_needed(const std::string& field)
{
    if (field.find_first_of(",\"") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join(const std::vector<std::string>& fields)
{
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out.push_back(',');
        }
        out += fields[i];
    }
    return out;
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IngestError(fmt::format("cannot open '{}'", path.string()));
    }
    return in;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in = open_input(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

RawAntennaRecord parse_antenna_row(const std::vector<std::string>& f, bool planar,
                                   std::size_t line)
{
    RawAntennaRecord r;
    r.line = line;
    r.site_id = std::string(trim(f[0]));
    r.operator_hint = std::string(trim(f[1]));
    const double a = require_double(f[2], planar ? "x_m" : "lat");
    const double b = require_double(f[3], planar ? "y_m" : "lon");
    if (planar) {
        r.planar = Point{a, b};
    } else {
        if (a < -90.0 || a > 90.0 || b < -180.0 || b > 180.0) {
            throw ValidationError(fmt::format("lat/lon ({}, {}) out of range", a, b));
        }
        r.geographic = GeoCoord{a, b};
    }
    r.height_m = require_double(f[4], "height_m");
    const std::string_view azimuth = trim(f[5]);
    if (azimuth != "OMNI") {
        const double az = require_double(azimuth, "azimuth_deg");
        if (az < 0.0 || az >= 360.0) {
            throw ValidationError(fmt::format("azimuth {} outside [0, 360)", az));
        }
        r.azimuth_deg = az;
    }
    r.frequency_mhz = require_double(f[6], "frequency_mhz");
    r.bandwidth_mhz = require_double(f[7], "bandwidth_mhz");
    r.eirp_dbw = require_double(f[8], "eirp_dbw");
    const auto tech = parse_technology(trim(f[9]));
    if (!tech) {
        throw ValidationError(fmt::format("unknown technology '{}'", trim(f[9])));
    }
    r.technology = *tech;
    if (!(r.frequency_mhz > 0.0)) {
        throw ValidationError("frequency_mhz must be > 0");
    }
    if (!(r.bandwidth_mhz > 0.0)) {
        throw ValidationError("bandwidth_mhz must be > 0");
    }
    if (!(r.height_m > 0.0)) {
        throw ValidationError("height_m must be > 0");
    }
    return r;
}

} // namespace

std::optional<Technology> parse_technology(std::string_view text)
{
    if (text == "2G") return Technology::g2;
    if (text == "3G") return Technology::g3;
    if (text == "4G") return Technology::g4;
    if (text == "5G") return Technology::g5;
    return std::nullopt;
}

std::string_view to_string(Technology tech)
{
    switch (tech) {
    case Technology::g2: return "2G";
    case Technology::g3: return "3G";
    case Technology::g4: return "4G";
    case Technology::g5: return "5G";
    }
    return "?";
}

std::string_view to_string(Environment env)
{
    return env == Environment::UMa ? "UMa" : "RMa";
}

AntennaParseResult parse_antenna_csv(std::istream& in)
{
    std::string line;
    if (!read_line(in, line)) {
        throw SchemaError("antenna CSV is empty (missing header row)");
    }
    std::vector<std::string> header;
    for (auto& field : split_csv_line(line)) {
        header.emplace_back(trim(field));
    }
    bool planar = false;
    if (header == kPlanarHeader) {
        planar = true;
    } else if (header != kGeographicHeader) {
        for (const auto& column : kGeographicHeader) {
            if (std::find(header.begin(), header.end(), column) == header.end() &&
                column != "lat" && column != "lon") {
                throw SchemaError(fmt::format("antenna CSV: missing required column '{}'", column));
            }
        }
        throw SchemaError(fmt::format("antenna CSV: header '{}' does not match '{}'", line,
                                      join(kGeographicHeader)));
    }

    AntennaParseResult result;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            result.errors.push_back(
                {line_no, fmt::format("expected {} fields, got {}", header.size(), fields.size())});
            continue;
        }
        try {
            result.records.push_back(parse_antenna_row(fields, planar, line_no));
        } catch (const ValidationError& e) {
            result.errors.push_back({line_no, e.what()});
        }
    }
    return result;
}

AntennaParseResult parse_antenna_csv(const std::filesystem::path& path)
{
    std::ifstream in = open_input(path);
    return parse_antenna_csv(in);
}

std::string format_antenna_csv(std::span<const RawAntennaRecord> records)
{
    const bool planar = !records.empty() && records.front().planar.has_value();
    std::string out = join(planar ? kPlanarHeader : kGeographicHeader) + "\n";
    for (const auto& r : records) {
        if (r.planar.has_value() != planar) {
            throw ValidationError("format_antenna_csv: mixed coordinate kinds");
        }
        std::vector<std::string> f;
        f.push_back(quote_if_needed(r.site_id));
        f.push_back(quote_if_needed(r.operator_hint));
        if (planar) {
            f.push_back(fmt::format("{}", r.planar->x));
            f.push_back(fmt::format("{}", r.planar->y));
        } else {
            f.push_back(fmt::format("{}", r.geographic->lat_deg));
            f.push_back(fmt::format("{}", r.geographic->lon_deg));
        }
        f.push_back(fmt::format("{}", r.height_m));
        f.push_back(r.azimuth_deg ? fmt::format("{}", *r.azimuth_deg) : std::string("OMNI"));
        f.push_back(fmt::format("{}", r.frequency_mhz));
        f.push_back(fmt::format("{}", r.bandwidth_mhz));
        f.push_back(fmt::format("{}", r.eirp_dbw));
        f.emplace_back(to_string(r.technology));
        out += join(f) + "\n";
    }
    return out;
}

FilterResult filter_records(std::vector<RawAntennaRecord> records)
{
    FilterResult result;
    for (auto& r : records) {
        if (r.technology == Technology::g2) {
            ++result.report.removed_2g;
        } else if (r.omnidirectional()) {
            ++result.report.removed_omni;
        } else {
            result.records.push_back(std::move(r));
        }
    }
    return result;
}

OperatorSpectrum::OperatorSpectrum(std::vector<std::string> names,
                                   std::vector<std::vector<Carrier>> carriers)
    : names_(std::move(names)), carriers_(std::move(carriers))
{
    if (names_.size() != carriers_.size()) {
        throw ValidationError("spectrum: one carrier list per operator required");
    }
    if (names_.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw ValidationError("spectrum: too many operators");
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) {
            throw ValidationError("spectrum: empty operator name");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (names_[i] == names_[j]) {
                throw ValidationError(fmt::format("spectrum: duplicate operator '{}'", names_[i]));
            }
        }
        for (const auto& c : carriers_[i]) {
            if (!(c.center_mhz > 0.0) || !(c.bandwidth_mhz > 0.0)) {
                throw ValidationError(
                    fmt::format("spectrum: operator '{}' has a non-positive carrier", names_[i]));
            }
        }
    }
    for (std::size_t a = 0; a < carriers_.size(); ++a) {
        for (std::size_t b = a + 1; b < carriers_.size(); ++b) {
            for (const auto& ca : carriers_[a]) {
                for (const auto& cb : carriers_[b]) {
                    if (ca.lower_mhz() < cb.upper_mhz() && cb.lower_mhz() < ca.upper_mhz()) {
                        throw ValidationError(fmt::format(
                            "spectrum: carriers {} ({}) of '{}' and {} ({}) of '{}' overlap",
                            ca.center_mhz, ca.bandwidth_mhz, names_[a], cb.center_mhz,
                            cb.bandwidth_mhz, names_[b]));
                    }
                }
            }
        }
    }
}

std::optional<OperatorId> OperatorSpectrum::find(std::string_view name) const
{
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) {
            return OperatorId{static_cast<std::uint16_t>(i)};
        }
    }
    return std::nullopt;
}

std::vector<OperatorId> OperatorSpectrum::operators() const
{
    std::vector<OperatorId> ids;
    for (std::size_t i = 0; i < names_.size(); ++i) {
        ids.push_back(OperatorId{static_cast<std::uint16_t>(i)});
    }
    return ids;
}

std::optional<OperatorId> OperatorSpectrum::owner_of(double frequency_mhz) const
{
    std::optional<OperatorId> best;
    double best_offset = std::numeric_limits<double>::infinity();
    bool tie = false;
    for (std::size_t i = 0; i < carriers_.size(); ++i) {
        for (const auto& c : carriers_[i]) {
            if (!c.contains(frequency_mhz)) {
                continue;
            }
            const double offset = std::abs(frequency_mhz - c.center_mhz);
            if (offset < best_offset) {
                best_offset = offset;
                best = OperatorId{static_cast<std::uint16_t>(i)};
                tie = false;
            } else if (offset == best_offset && best && best->value != i) {
                tie = true;
            }
        }
    }
    if (tie) {
        throw UnassignedOperatorError(
            fmt::format("frequency {} MHz sits on a boundary shared by two operators", frequency_mhz));
    }
    return best;
}

OperatorSpectrum parse_spectrum_json(std::string_view text)
{
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(fmt::format("spectrum JSON: {}", e.what()));
    }
    if (!doc.is_object()) {
        throw SchemaError("spectrum JSON: top level must be an object of operators");
    }
    std::vector<std::string> names;
    std::vector<std::vector<Carrier>> carriers;
    for (const auto& [op, techs] : doc.items()) {
        if (!techs.is_object()) {
            throw SchemaError(fmt::format("spectrum JSON: operator '{}' must map technologies", op));
        }
        std::vector<Carrier> list;
        for (const auto& [tech_name, entries] : techs.items()) {
            const auto tech = parse_technology(tech_name);
            if (!tech) {
                throw SchemaError(fmt::format("spectrum JSON: unknown technology '{}'", tech_name));
            }
            if (!entries.is_array()) {
                throw SchemaError("spectrum JSON: carrier list must be an array");
            }
            for (const auto& entry : entries) {
                if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
                    !entry[1].is_number()) {
                    throw SchemaError(fmt::format(
                        "spectrum JSON: '{}'/{} carrier must be [center_mhz, bandwidth_mhz]", op,
                        tech_name));
                }
                list.push_back({entry[0].get<double>(), entry[1].get<double>(), *tech});
            }
        }
        names.push_back(op);
        carriers.push_back(std::move(list));
    }
    try {
        return OperatorSpectrum(std::move(names), std::move(carriers));
    } catch (const ValidationError& e) {
        throw SchemaError(e.what());
    }
}

OperatorSpectrum load_spectrum(const std::filesystem::path& path)
{
    return parse_spectrum_json(read_file(path));
}

OperatorId assign_operator(const RawAntennaRecord& record, const OperatorSpectrum& spectrum)
{
    if (!record.operator_hint.empty()) {
        const auto hinted = spectrum.find(record.operator_hint);
        if (!hinted) {
            throw UnassignedOperatorError(
                fmt::format("operator '{}' is not in the spectrum table", record.operator_hint));
        }
        for (const auto& c : spectrum.carriers(*hinted)) {
            if (c.contains(record.frequency_mhz)) {
                return *hinted;
            }
        }
        throw UnassignedOperatorError(fmt::format("operator '{}' owns no carrier at {} MHz",
                                                  record.operator_hint, record.frequency_mhz));
    }
    const auto owner = spectrum.owner_of(record.frequency_mhz);
    if (!owner) {
        throw UnassignedOperatorError(
            fmt::format("no operator carrier contains {} MHz", record.frequency_mhz));
    }
    return *owner;
}

PopulationGrid::PopulationGrid(std::vector<PopulationCell> cells) : cells_(std::move(cells))
{
    if (cells_.empty()) {
        return;
    }
    anchor_ = cells_.front().origin;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const auto& c = cells_[i];
        validate(c);
        if (c.size != kPopulationCellSize) {
            throw ValidationError(fmt::format("population cell size {} != {}", c.size,
                                              kPopulationCellSize));
        }
        const double fx = (c.origin.x - anchor_.x) / kPopulationCellSize;
        const double fy = (c.origin.y - anchor_.y) / kPopulationCellSize;
        const auto ix = static_cast<std::int64_t>(std::llround(fx));
        const auto iy = static_cast<std::int64_t>(std::llround(fy));
        if (std::abs(fx - static_cast<double>(ix)) > 1e-6 || std::abs(fy - static_cast<double>(iy)) > 1e-6) {
            throw ValidationError(fmt::format("population cell at ({}, {}) is off the 500 m lattice",
                                              c.origin.x, c.origin.y));
        }
        lattice_.push_back({{ix, iy}, i});
    }
    std::sort(lattice_.begin(), lattice_.end());
    for (std::size_t i = 1; i < lattice_.size(); ++i) {
        if (lattice_[i].first == lattice_[i - 1].first) {
            const auto& c = cells_[lattice_[i].second];
            throw ValidationError(
                fmt::format("duplicate population cell at ({}, {})", c.origin.x, c.origin.y));
        }
    }
}

const PopulationCell* PopulationGrid::locate(Point p) const
{
    if (cells_.empty()) {
        return nullptr;
    }
    const auto ix = static_cast<std::int64_t>(std::floor((p.x - anchor_.x) / kPopulationCellSize));
    const auto iy = static_cast<std::int64_t>(std::floor((p.y - anchor_.y) / kPopulationCellSize));
    const auto it = std::lower_bound(
        lattice_.begin(), lattice_.end(), std::make_pair(std::make_pair(ix, iy), std::size_t{0}));
    if (it == lattice_.end() || it->first != std::make_pair(ix, iy)) {
        return nullptr;
    }
    return &cells_[it->second];
}

const PopulationCell& PopulationGrid::nearest(Point p) const
{
    if (cells_.empty()) {
        throw ValidationError("population grid is empty");
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const double d = distance(cells_[i].center(), p);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return cells_[best];
}

std::vector<PopulationCell> PopulationGrid::within(const Region& region) const
{
    std::vector<PopulationCell> out;
    for (const auto& c : cells_) {
        if (point_in_region(c.center(), region)) {
            out.push_back(c);
        }
    }
    return out;
}

PopulationGrid parse_population_csv(std::istream& in)
{
    std::string line;
    if (!read_line(in, line)) {
        throw SchemaError("population CSV is empty (missing header row)");
    }
    std::vector<std::string> header;
    for (auto& field : split_csv_line(line)) {
        header.emplace_back(trim(field));
    }
    if (header != kPopulationHeader) {
        throw SchemaError(fmt::format("population CSV: header '{}' does not match '{}'", line,
                                      join(kPopulationHeader)));
    }
    std::vector<PopulationCell> cells;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        try {
            if (f.size() != 4) {
                throw ValidationError(fmt::format("expected 4 fields, got {}", f.size()));
            }
            PopulationCell cell;
            cell.origin = {require_double(f[0], "cell_x_m"), require_double(f[1], "cell_y_m")};
            cell.population = require_double(f[2], "population");
            const double urbanity = require_double(f[3], "urbanity");
            if (urbanity != std::floor(urbanity)) {
                throw ValidationError("urbanity must be an integer");
            }
            cell.urbanity = static_cast<int>(urbanity);
            validate(cell);
            cells.push_back(cell);
        } catch (const ValidationError& e) {
            throw IngestError(fmt::format("population CSV line {}: {}", line_no, e.what()));
        }
    }
    try {
        return PopulationGrid(std::move(cells));
    } catch (const ValidationError& e) {
        throw IngestError(fmt::format("population CSV: {}", e.what()));
    }
}

PopulationGrid load_population(const std::filesystem::path& path)
{
    std::ifstream in = open_input(path);
    return parse_population_csv(in);
}

Environment environment_for_urbanity(int urbanity)
{
    if (urbanity < 1 || urbanity > 5) {
        throw ValidationError(fmt::format("urbanity {} not in 1..5", urbanity));
    }
    return urbanity <= 3 ? Environment::UMa : Environment::RMa;
}

EnvironmentClass classify_environment(Point position, const PopulationGrid& grid)
{
    if (grid.empty()) {
        throw ValidationError("cannot classify environment: population grid is empty");
    }
    if (const PopulationCell* cell = grid.locate(position)) {
        return {environment_for_urbanity(cell->urbanity), false};
    }
    return {environment_for_urbanity(grid.nearest(position).urbanity), true};
}

namespace {

const ordered_json& polygon_geometry(const ordered_json& doc)
{
    const ordered_json* node = &doc;
    if (node->value("type", "") == "FeatureCollection") {
        const auto& features = node->at("features");
        if (!features.is_array() || features.empty()) {
            throw SchemaError("GeoJSON FeatureCollection has no features");
        }
        node = &features.at(0);
    }
    if (node->value("type", "") == "Feature") {
        node = &node->at("geometry");
    }
    if (node->value("type", "") != "Polygon") {
        throw SchemaError("region GeoJSON must be a Polygon");
    }
    const auto& rings = node->at("coordinates");
    if (!rings.is_array() || rings.size() != 1) {
        throw SchemaError("region GeoJSON Polygon must have exactly one ring");
    }
    return rings.at(0);
}

std::vector<Point> ring_points(const ordered_json& ring)
{
    std::vector<Point> pts;
    for (const auto& v : ring) {
        if (!v.is_array() || v.size() < 2 || !v[0].is_number() || !v[1].is_number()) {
            throw SchemaError("region GeoJSON vertex must be [x, y]");
        }
        pts.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return pts;
}

ordered_json parse_geojson(std::string_view text)
{
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(fmt::format("region GeoJSON: {}", e.what()));
    }
}

} // namespace

Projection projection_at_geojson_centroid(std::string_view text)
{
    const auto doc = parse_geojson(text);
    try {
        const Region lonlat("geographic", ring_points(polygon_geometry(doc)));
        Projection projection;
        projection.origin_lon_deg = lonlat.centroid().x;
        projection.origin_lat_deg = lonlat.centroid().y;
        return projection;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(fmt::format("region GeoJSON: {}", e.what()));
    }
}

Region parse_region_geojson(std::string_view text, std::string id, RegionCrs crs,
                            const std::optional<Projection>& projection)
{
    const auto doc = parse_geojson(text);
    std::vector<Point> pts;
    try {
        pts = ring_points(polygon_geometry(doc));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(fmt::format("region GeoJSON: {}", e.what()));
    }
    if (crs == RegionCrs::geographic) {
        const Projection proj = projection ? *projection : projection_at_geojson_centroid(text);
        for (auto& p : pts) {
            p = proj.project(p.y, p.x);
        }
    }
    return Region(std::move(id), std::move(pts));
}

Region parse_region_csv(std::istream& in, std::string id)
{
    std::string line;
    if (!read_line(in, line)) {
        throw SchemaError("region CSV is empty (missing header row)");
    }
    std::vector<std::string> header;
    for (auto& field : split_csv_line(line)) {
        header.emplace_back(trim(field));
    }
    if (header != std::vector<std::string>{"x_m", "y_m"}) {
        throw SchemaError(fmt::format("region CSV: header '{}' does not match 'x_m,y_m'", line));
    }
    std::vector<Point> pts;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        const auto x = f.size() == 2 ? parse_double(f[0]) : std::nullopt;
        const auto y = f.size() == 2 ? parse_double(f[1]) : std::nullopt;
        if (!x || !y) {
            throw IngestError(fmt::format("region CSV line {}: expected two numbers", line_no));
        }
        pts.push_back({*x, *y});
    }
    return Region(std::move(id), std::move(pts));
}

Region load_region(const std::filesystem::path& path, std::string id, RegionCrs crs,
                   const std::optional<Projection>& projection)
{
    const auto ext = path.extension().string();
    if (ext == ".csv") {
        if (crs == RegionCrs::geographic) {
            throw SchemaError("region CSV vertex lists are planar (x_m,y_m)");
        }
        std::ifstream in = open_input(path);
        return parse_region_csv(in, std::move(id));
    }
    return parse_region_geojson(read_file(path), std::move(id), crs, projection);
}

double derated_power_w(double eirp_dbw) noexcept
{
    return kPowerDerating * std::pow(10.0, eirp_dbw / 10.0);
}

CellBuildResult build_cells(std::span<const RawAntennaRecord> records,
                            const OperatorSpectrum& spectrum, const PopulationGrid& grid,
                            const std::optional<Projection>& projection)
{
    CellBuildResult result;
    std::uint32_t next_id = 0;
    for (const auto& r : records) {
        if (r.omnidirectional()) {
            result.quarantined.push_back({r.line, "omnidirectional antenna (filter first)"});
            continue;
        }
        OperatorId op;
        try {
            op = assign_operator(r, spectrum);
        } catch (const UnassignedOperatorError& e) {
            result.quarantined.push_back({r.line, e.what()});
            continue;
        }
        Point position;
        if (r.planar) {
            position = *r.planar;
        } else if (projection) {
            position = projection->project(r.geographic->lat_deg, r.geographic->lon_deg);
        } else {
            result.quarantined.push_back(
                {r.line, "geographic coordinates need a projection (set one in the config)"});
            continue;
        }
        const auto env = classify_environment(position, grid);
        if (env.from_nearest) {
            result.warnings.push_back(fmt::format(
                "line {}: site '{}' lies outside the population grid; environment taken from "
                "the nearest cell",
                r.line, r.site_id));
        }
        Cell cell;
        cell.id = CellId{next_id++};
        cell.site_id = r.site_id;
        cell.operator_id = op;
        cell.position = position;
        cell.height_m = r.height_m;
        cell.azimuth_deg = *r.azimuth_deg;
        cell.frequency_mhz = r.frequency_mhz;
        cell.bandwidth_hz = r.bandwidth_mhz * 1e6;
        cell.tx_power_w = derated_power_w(r.eirp_dbw);
        cell.environment = env.environment;
        result.cells.push_back(std::move(cell));
    }
    return result;
}

std::vector<Cell> select_cells_for_region(std::vector<Cell> cells, const Region& region,
                                          double margin_m)
{
    if (!(margin_m >= 0.0)) {
        throw ValidationError(fmt::format("border margin {} must be >= 0", margin_m));
    }
    std::vector<Cell> out;
    for (auto& c : cells) {
        c.in_region = point_in_region(c.position, region);
        c.border_margin = !c.in_region && region.distance_to_boundary(c.position) <= margin_m;
        if (c.in_region || c.border_margin) {
            out.push_back(std::move(c));
        }
    }
    return out;
}

} // namespace cellres

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdk/geo.hpp"
#include "sdk/propagation.hpp"

namespace sdk::ingest {

/// One hourly throughput row. (site_id, date, hour) is unique per dataset.
struct TrafficRecord {
  std::string site_id;
  std::string date;  // ISO-8601 calendar date, YYYY-MM-DD
  int hour = 0;      // 0..23
  double dl_throughput_mbps = 0.0;
};

/// Crowdsourced sample count at a location.
struct MeasurementRecord {
  geo::GeoPoint location;
  std::int64_t samples = 1;
};

/// Regular lat/lon raster, stored south-up (row 0 = southernmost row).
struct RasterGrid {
  geo::GeoPoint origin;   // lower-left corner
  double cell_deg = 0.0;  // > 0
  std::int32_t n_cols = 0;
  std::int32_t n_rows = 0;
  std::vector<double> values;  // row-major, south-up, n_cols * n_rows
  double nodata = -9999.0;

  double at(std::int32_t col, std::int32_t row) const {
    return values[static_cast<std::size_t>(row) * n_cols + col];
  }
  /// Geographic center of a pixel.
  geo::GeoPoint pixel_center(std::int32_t col, std::int32_t row) const {
    return {origin.lat + (row + 0.5) * cell_deg, origin.lon + (col + 0.5) * cell_deg};
  }
};

enum class SourceKind { kPolygonValue, kPoint, kLine };

/// How a polygon-attached value behaves under disaggregation. Extensive
/// values (counts, areas) split with overlap area; intensive values (rates,
/// medians) average.
enum class Allocation { kIntensive, kExtensive };

std::string to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& s);
std::string to_string(Allocation a);
Allocation allocation_from_string(const std::string& s);

/// One vector feature source: simple polygons with a numeric value, bare
/// points, or polylines.
struct FeatureSource {
  SourceKind kind = SourceKind::kPoint;
  std::string name;
  Allocation allocation = Allocation::kExtensive;  // polygon_value only

  struct ValuedPolygon {
    std::vector<geo::GeoPoint> ring;  // simple, closed; stored without the repeated last vertex
    double value = 0.0;
  };
  std::vector<ValuedPolygon> polygons;
  std::vector<geo::GeoPoint> points;
  std::vector<std::vector<geo::GeoPoint>> lines;  // each polyline has >= 2 vertices
};

// --- CSV ------------------------------------------------------------------
// All CSV files are UTF-8 with LF or CRLF line endings, a mandatory header,
// and optional '#'-prefixed comment lines. Parsers validate every row and
// throw one ValidationError naming all offenders after the full scan.

/// Header: site_id,lat,lon,tx_power_dbm,antenna_height_m,center_freq_mhz,bandwidth_mhz,environment
std::vector<propagation::SiteRecord> parse_sites(const std::string& path);
void write_sites(const std::vector<propagation::SiteRecord>& sites, const std::string& path);

/// Header: site_id,date,hour,dl_throughput_mbps
std::vector<TrafficRecord> parse_traffic(const std::string& path);
void write_traffic(const std::vector<TrafficRecord>& records, const std::string& path);

/// Header: lat,lon,samples
std::vector<MeasurementRecord> parse_measurements(const std::string& path);
void write_measurements(const std::vector<MeasurementRecord>& records, const std::string& path);

// --- ESRI ASCII grid ------------------------------------------------------

/// ESRI ASCII grid (.asc): ncols, nrows, xllcorner, yllcorner, cellsize,
/// optional NODATA_value, then values row-major from the north. Values are
/// re-ordered to the internal south-up layout.
RasterGrid parse_raster(const std::string& path);
void write_raster(const RasterGrid& raster, const std::string& path);

// --- GeoJSON ---------------------------------------------------------------

/// GeoJSON FeatureCollection of Point / LineString / Polygon features.
/// polygon_value sources require a numeric "value" property per feature.
/// Multi-geometries and polygon holes are rejected (UnsupportedGeometry).
FeatureSource parse_feature_source(const std::string& path, SourceKind kind,
                                   const std::string& name,
                                   Allocation allocation = Allocation::kExtensive);
void write_feature_source(const FeatureSource& source, const std::string& path);

// --- helpers shared by the format writers ----------------------------------

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double v);

/// Entire file as a string. Throws IoError.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sdk::ingest

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace sdk::geo {

/// Mean Earth radius used by the local equirectangular projection.
inline constexpr double kEarthRadiusM = 6371000.0;

struct GeoPoint {
  double lat = 0.0;  // degrees WGS84, [-90, 90]
  double lon = 0.0;  // degrees WGS84, [-180, 180]

  bool operator==(const GeoPoint&) const = default;
};

struct ProjectedPoint {
  double x = 0.0;  // meters east of projection origin
  double y = 0.0;  // meters north of projection origin

  bool operator==(const ProjectedPoint&) const = default;
};

/// Grid cell address. Ordering is row-major (row, then col) so containers
/// keyed by CellId iterate deterministically south-to-north.
struct CellId {
  std::int32_t col = 0;
  std::int32_t row = 0;

  friend auto operator<=>(const CellId& a, const CellId& b) {
    if (auto c = a.row <=> b.row; c != 0) return c;
    return a.col <=> b.col;
  }
  friend bool operator==(const CellId&, const CellId&) = default;
};

/// Uniform metric grid over a bounding box. Cells are half-open squares
/// [min, max) per axis in the projected plane; (col 0, row 0) sits at the
/// grid origin (southwest corner).
struct GridSpec {
  ProjectedPoint origin;      // projected coordinates of the SW corner
  double cell_size_m = 1500.0;
  std::int32_t n_cols = 0;
  std::int32_t n_rows = 0;
  GeoPoint projection_origin;  // geographic anchor of the projection

  std::int64_t cell_count() const {
    return static_cast<std::int64_t>(n_cols) * static_cast<std::int64_t>(n_rows);
  }
  bool contains(CellId c) const {
    return c.col >= 0 && c.col < n_cols && c.row >= 0 && c.row < n_rows;
  }

  bool operator==(const GridSpec&) const = default;
};

/// Local equirectangular projection about `origin`:
///   x = R * (lon - lon0) * pi/180 * cos(lat0 * pi/180)
///   y = R * (lat - lat0) * pi/180
ProjectedPoint project(const GeoPoint& p, const GeoPoint& origin);

/// Inverse of project(); round-trips to < 1e-9 degrees within 200 km.
GeoPoint unproject(const ProjectedPoint& p, const GeoPoint& origin);

/// Builds the smallest grid anchored at bbox_min that fully covers the box.
/// The projection is anchored at bbox_min, so the returned spec has
/// origin == (0, 0) and projection_origin == bbox_min. Throws DegenerateBBox
/// when the box has zero area.
GridSpec make_grid(const GeoPoint& bbox_min, const GeoPoint& bbox_max, double cell_size_m = 1500.0);

/// Cell containing p, or nullopt when p lies outside the grid. Points on an
/// interior boundary belong to the higher-index cell.
std::optional<CellId> locate(const GeoPoint& p, const GridSpec& grid);

/// Same rule applied to an already-projected point.
std::optional<CellId> locate_projected(const ProjectedPoint& p, const GridSpec& grid);

/// Projected center of a cell. No bounds check.
ProjectedPoint cell_center(CellId c, const GridSpec& grid);

/// Geographic corners of a cell, counter-clockwise from the SW corner
/// (SW, SE, NE, NW). Throws CellOutOfBounds.
std::array<GeoPoint, 4> cell_polygon(CellId c, const GridSpec& grid);

/// Length in meters of the part of segment ab inside cell c (Liang-Barsky
/// clipping). Zero when disjoint.
double segment_length_in_cell(const ProjectedPoint& a, const ProjectedPoint& b, CellId c,
                              const GridSpec& grid);

/// JSON round-trip: {origin_lat, origin_lon, cell_size_m, n_cols, n_rows}.
/// origin_lat/lon are the geographic coordinates of the grid's SW corner;
/// loading re-anchors the projection there, which reproduces the grid that
/// make_grid built exactly.
std::string grid_to_json(const GridSpec& grid);
GridSpec grid_from_json(const std::string& json_text);

void save_grid(const GridSpec& grid, const std::string& path);
GridSpec load_grid(const std::string& path);

}  // namespace sdk::geo

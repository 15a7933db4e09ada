#include "sdk/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sdk/errors.hpp"

namespace sdk::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Snap tolerance for cell indexing, in meters. Absorbs projection round-trip
// noise so a point constructed on a cell edge lands in the higher-index cell.
constexpr double kLocateSnapM = 1e-6;

// Relative slack when counting cells, so a bbox that is an exact multiple of
// the cell size does not gain a spurious extra row/column from rounding.
constexpr double kCountSlack = 1e-9;

std::int32_t cell_index(double offset_m, double cell_size_m) {
  return static_cast<std::int32_t>(std::floor((offset_m + kLocateSnapM) / cell_size_m));
}

}  // namespace

ProjectedPoint project(const GeoPoint& p, const GeoPoint& origin) {
  const double x =
      kEarthRadiusM * (p.lon - origin.lon) * kDegToRad * std::cos(origin.lat * kDegToRad);
  const double y = kEarthRadiusM * (p.lat - origin.lat) * kDegToRad;
  return {x, y};
}

GeoPoint unproject(const ProjectedPoint& p, const GeoPoint& origin) {
  const double lat = origin.lat + p.y / (kEarthRadiusM * kDegToRad);
  const double lon = origin.lon + p.x / (kEarthRadiusM * kDegToRad * std::cos(origin.lat * kDegToRad));
  return {lat, lon};
}

GridSpec make_grid(const GeoPoint& bbox_min, const GeoPoint& bbox_max, double cell_size_m) {
  if (cell_size_m <= 0.0) {
    throw DegenerateBBox("cell_size_m must be positive");
  }
  if (bbox_min.lat >= bbox_max.lat || bbox_min.lon >= bbox_max.lon) {
    throw DegenerateBBox("bbox_min must lie strictly southwest of bbox_max");
  }
  const ProjectedPoint extent = project(bbox_max, bbox_min);
  const auto count = [cell_size_m](double span_m) {
    const double n = std::ceil(span_m / cell_size_m - kCountSlack);
    return std::max<std::int32_t>(1, static_cast<std::int32_t>(n));
  };
  GridSpec grid;
  grid.origin = {0.0, 0.0};
  grid.cell_size_m = cell_size_m;
  grid.n_cols = count(extent.x);
  grid.n_rows = count(extent.y);
  grid.projection_origin = bbox_min;
  return grid;
}

std::optional<CellId> locate_projected(const ProjectedPoint& p, const GridSpec& grid) {
  const CellId c{cell_index(p.x - grid.origin.x, grid.cell_size_m),
                 cell_index(p.y - grid.origin.y, grid.cell_size_m)};
  if (!grid.contains(c)) {
    return std::nullopt;
  }
  return c;
}

std::optional<CellId> locate(const GeoPoint& p, const GridSpec& grid) {
  return locate_projected(project(p, grid.projection_origin), grid);
}

ProjectedPoint cell_center(CellId c, const GridSpec& grid) {
  return {grid.origin.x + (c.col + 0.5) * grid.cell_size_m,
          grid.origin.y + (c.row + 0.5) * grid.cell_size_m};
}

std::array<GeoPoint, 4> cell_polygon(CellId c, const GridSpec& grid) {
  if (!grid.contains(c)) {
    throw CellOutOfBounds("cell (" + std::to_string(c.col) + ", " + std::to_string(c.row) +
                          ") outside grid " + std::to_string(grid.n_cols) + "x" +
                          std::to_string(grid.n_rows));
  }
  const double x0 = grid.origin.x + c.col * grid.cell_size_m;
  const double y0 = grid.origin.y + c.row * grid.cell_size_m;
  const double x1 = x0 + grid.cell_size_m;
  const double y1 = y0 + grid.cell_size_m;
  return {unproject({x0, y0}, grid.projection_origin), unproject({x1, y0}, grid.projection_origin),
          unproject({x1, y1}, grid.projection_origin), unproject({x0, y1}, grid.projection_origin)};
}

double segment_length_in_cell(const ProjectedPoint& a, const ProjectedPoint& b, CellId c,
                              const GridSpec& grid) {
  const double x0 = grid.origin.x + c.col * grid.cell_size_m;
  const double y0 = grid.origin.y + c.row * grid.cell_size_m;
  const double x1 = x0 + grid.cell_size_m;
  const double y1 = y0 + grid.cell_size_m;

  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double length = std::hypot(dx, dy);
  if (length == 0.0) {
    return 0.0;
  }

  // Liang-Barsky parametric clip of a + t*(b-a), t in [0,1], to the cell box.
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - x0, x1 - a.x, a.y - y0, y1 - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) {
        return 0.0;  // parallel and outside
      }
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
  }
  if (t0 >= t1) {
    return 0.0;
  }
  return (t1 - t0) * length;
}

std::string grid_to_json(const GridSpec& grid) {
  const GeoPoint sw = unproject(grid.origin, grid.projection_origin);
  nlohmann::json j{{"origin_lat", sw.lat},
                   {"origin_lon", sw.lon},
                   {"cell_size_m", grid.cell_size_m},
                   {"n_cols", grid.n_cols},
                   {"n_rows", grid.n_rows}};
  return j.dump(2) + "\n";
}

GridSpec grid_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ParseError("<grid json>", 1, 1, "invalid JSON");
  }
  for (const char* key : {"origin_lat", "origin_lon", "cell_size_m", "n_cols", "n_rows"}) {
    if (!j.contains(key)) {
      throw ParseError("<grid json>", 1, 1, std::string("missing key '") + key + "'");
    }
  }
  GridSpec grid;
  grid.origin = {0.0, 0.0};
  grid.projection_origin = {j["origin_lat"].get<double>(), j["origin_lon"].get<double>()};
  grid.cell_size_m = j["cell_size_m"].get<double>();
  grid.n_cols = j["n_cols"].get<std::int32_t>();
  grid.n_rows = j["n_rows"].get<std::int32_t>();
  if (grid.cell_size_m <= 0.0 || grid.n_cols < 1 || grid.n_rows < 1) {
    throw ValidationError({"grid spec out of range: cell_size_m > 0 and n_cols, n_rows >= 1"});
  }
  return grid;
}

void save_grid(const GridSpec& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << grid_to_json(grid);
}

GridSpec load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return grid_from_json(buf.str());
}

}  // namespace sdk::geo

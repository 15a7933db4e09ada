#include "sdk/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "sdk/errors.hpp"

namespace sdk::features {

namespace {

using geo::ProjectedPoint;

double ring_area(const std::vector<ProjectedPoint>& ring) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[(i + 1) % ring.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::abs(acc);
}

bool segments_intersect(const ProjectedPoint& p1, const ProjectedPoint& p2,
                        const ProjectedPoint& q1, const ProjectedPoint& q2) {
  const auto cross = [](const ProjectedPoint& o, const ProjectedPoint& a,
                        const ProjectedPoint& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

/// Proper (interior) crossings between non-adjacent ring edges.
bool ring_self_intersects(const std::vector<ProjectedPoint>& ring) {
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip edges that share a vertex.
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) {
        continue;
      }
      if (segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n])) {
        return true;
      }
    }
  }
  return false;
}

/// Sutherland-Hodgman clip of a polygon to the axis-aligned cell box.
std::vector<ProjectedPoint> clip_to_box(std::vector<ProjectedPoint> poly, double x0, double y0,
                                        double x1, double y1) {
  const auto clip_edge = [](const std::vector<ProjectedPoint>& input, auto inside,
                            auto intersect) {
    std::vector<ProjectedPoint> out;
    out.reserve(input.size() + 4);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const ProjectedPoint& cur = input[i];
      const ProjectedPoint& prev = input[(i + input.size() - 1) % input.size()];
      const bool cur_in = inside(cur);
      const bool prev_in = inside(prev);
      if (cur_in) {
        if (!prev_in) {
          out.push_back(intersect(prev, cur));
        }
        out.push_back(cur);
      } else if (prev_in) {
        out.push_back(intersect(prev, cur));
      }
    }
    return out;
  };
  const auto lerp_x = [](const ProjectedPoint& a, const ProjectedPoint& b, double x) {
    const double t = (x - a.x) / (b.x - a.x);
    return ProjectedPoint{x, a.y + t * (b.y - a.y)};
  };
  const auto lerp_y = [](const ProjectedPoint& a, const ProjectedPoint& b, double y) {
    const double t = (y - a.y) / (b.y - a.y);
    return ProjectedPoint{a.x + t * (b.x - a.x), y};
  };

  poly = clip_edge(poly, [&](const ProjectedPoint& p) { return p.x >= x0; },
                   [&](const ProjectedPoint& a, const ProjectedPoint& b) { return lerp_x(a, b, x0); });
  if (poly.empty()) return poly;
  poly = clip_edge(poly, [&](const ProjectedPoint& p) { return p.x <= x1; },
                   [&](const ProjectedPoint& a, const ProjectedPoint& b) { return lerp_x(a, b, x1); });
  if (poly.empty()) return poly;
  poly = clip_edge(poly, [&](const ProjectedPoint& p) { return p.y >= y0; },
                   [&](const ProjectedPoint& a, const ProjectedPoint& b) { return lerp_y(a, b, y0); });
  if (poly.empty()) return poly;
  poly = clip_edge(poly, [&](const ProjectedPoint& p) { return p.y <= y1; },
                   [&](const ProjectedPoint& a, const ProjectedPoint& b) { return lerp_y(a, b, y1); });
  return poly;
}

std::vector<ProjectedPoint> project_ring(const std::vector<geo::GeoPoint>& ring,
                                         const geo::GridSpec& grid) {
  std::vector<ProjectedPoint> out;
  out.reserve(ring.size());
  for (const auto& p : ring) {
    out.push_back(geo::project(p, grid.projection_origin));
  }
  return out;
}

struct CellRange {
  std::int32_t c0, c1, r0, r1;
  bool empty;
};

CellRange cell_range(double min_x, double max_x, double min_y, double max_y,
                     const geo::GridSpec& grid) {
  const double cs = grid.cell_size_m;
  CellRange range{};
  const auto col_of = [&](double x) {
    return static_cast<std::int32_t>(std::floor((x - grid.origin.x) / cs));
  };
  const auto row_of = [&](double y) {
    return static_cast<std::int32_t>(std::floor((y - grid.origin.y) / cs));
  };
  range.c0 = std::max(col_of(min_x), 0);
  range.c1 = std::min(col_of(max_x), grid.n_cols - 1);
  range.r0 = std::max(row_of(min_y), 0);
  range.r1 = std::min(row_of(max_y), grid.n_rows - 1);
  range.empty = range.c0 > range.c1 || range.r0 > range.r1;
  return range;
}

}  // namespace

CellSeries rasterize_polygon_value(const ingest::FeatureSource& src, const geo::GridSpec& grid) {
  const bool extensive = src.allocation == ingest::Allocation::kExtensive;
  CellSeries out(grid, src.name, extensive ? "value" : "mean");
  CellSeries weight_sum(grid, src.name + "_w", "");
  CellSeries weighted_value(grid, src.name + "_wv", "");

  for (std::size_t idx = 0; idx < src.polygons.size(); ++idx) {
    const auto& poly = src.polygons[idx];
    const std::vector<ProjectedPoint> ring = project_ring(poly.ring, grid);
    if (ring.size() < 3) {
      throw GeometryError("polygon " + std::to_string(idx) + ": fewer than 3 vertices");
    }
    if (ring_self_intersects(ring)) {
      throw GeometryError("polygon " + std::to_string(idx) + ": self-intersecting ring");
    }
    const double total_area = ring_area(ring);
    if (total_area <= 0.0) {
      throw GeometryError("polygon " + std::to_string(idx) + ": zero area");
    }

    double min_x = ring[0].x, max_x = ring[0].x, min_y = ring[0].y, max_y = ring[0].y;
    for (const auto& p : ring) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    const CellRange range = cell_range(min_x, max_x, min_y, max_y, grid);
    if (range.empty) {
      continue;
    }
    for (std::int32_t row = range.r0; row <= range.r1; ++row) {
      for (std::int32_t col = range.c0; col <= range.c1; ++col) {
        const double x0 = grid.origin.x + col * grid.cell_size_m;
        const double y0 = grid.origin.y + row * grid.cell_size_m;
        const auto clipped = clip_to_box(ring, x0, y0, x0 + grid.cell_size_m, y0 + grid.cell_size_m);
        if (clipped.size() < 3) {
          continue;
        }
        const double overlap = ring_area(clipped);
        if (overlap <= 0.0) {
          continue;
        }
        const geo::CellId cell{col, row};
        if (extensive) {
          out.add(cell, poly.value * (overlap / total_area));
        } else {
          weight_sum.add(cell, overlap);
          weighted_value.add(cell, poly.value * overlap);
        }
      }
    }
  }

  if (!extensive) {
    for (const auto& [cell, wsum] : weight_sum.values()) {
      if (wsum > 0.0) {
        out.set(cell, weighted_value.at(cell) / wsum);
      }
    }
  }
  return out;
}

PointRasterization rasterize_points(const ingest::FeatureSource& src, const geo::GridSpec& grid) {
  PointRasterization result{CellSeries(grid, src.name, "count"), 0};
  for (const auto& p : src.points) {
    if (const auto cell = geo::locate(p, grid)) {
      result.counts.add(*cell, 1.0);
    } else {
      ++result.outside_count;
    }
  }
  return result;
}

CellSeries rasterize_lines(const ingest::FeatureSource& src, const geo::GridSpec& grid) {
  CellSeries out(grid, src.name, "m");
  for (const auto& line : src.lines) {
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      const ProjectedPoint a = geo::project(line[i], grid.projection_origin);
      const ProjectedPoint b = geo::project(line[i + 1], grid.projection_origin);
      const CellRange range = cell_range(std::min(a.x, b.x), std::max(a.x, b.x),
                                         std::min(a.y, b.y), std::max(a.y, b.y), grid);
      if (range.empty) {
        continue;
      }
      for (std::int32_t row = range.r0; row <= range.r1; ++row) {
        for (std::int32_t col = range.c0; col <= range.c1; ++col) {
          const double len = geo::segment_length_in_cell(a, b, {col, row}, grid);
          if (len > 0.0) {
            out.add({col, row}, len);
          }
        }
      }
    }
  }
  return out;
}

FeatureTable assemble(const std::vector<CellSeries>& columns, const CellSeries& target,
                      MaskRule mask) {
  for (const auto& col : columns) {
    if (!(col.grid() == target.grid())) {
      throw GridMismatch("feature column '" + col.name() + "' uses a different grid than target");
    }
  }
  std::set<std::string> names;
  for (const auto& col : columns) {
    if (!names.insert(col.name()).second) {
      throw ValidationError({"duplicate column name '" + col.name() + "'"});
    }
  }

  std::set<geo::CellId> cells;
  switch (mask) {
    case MaskRule::kAllCells:
      for (std::int32_t row = 0; row < target.grid().n_rows; ++row) {
        for (std::int32_t col = 0; col < target.grid().n_cols; ++col) {
          cells.insert({col, row});
        }
      }
      break;
    case MaskRule::kTargetNonzero:
      for (const auto& [cell, v] : target.values()) {
        if (v != 0.0) {
          cells.insert(cell);
        }
      }
      break;
    case MaskRule::kAnyNonzero:
      for (const auto& [cell, v] : target.values()) {
        if (v != 0.0) {
          cells.insert(cell);
        }
      }
      for (const auto& col : columns) {
        for (const auto& [cell, v] : col.values()) {
          if (v != 0.0) {
            cells.insert(cell);
          }
        }
      }
      break;
  }
  if (cells.empty()) {
    throw EmptyTable("mask selected no cells");
  }

  FeatureTable table;
  table.grid = target.grid();
  table.cell_ids.assign(cells.begin(), cells.end());
  for (const auto& col : columns) {
    table.column_names.push_back(col.name());
  }
  table.x = ml::Matrix(table.cell_ids.size(), columns.size());
  table.target.resize(table.cell_ids.size());
  for (std::size_t i = 0; i < table.cell_ids.size(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      table.x(i, j) = columns[j].at(table.cell_ids[i]);
    }
    table.target[i] = target.at(table.cell_ids[i]);
  }
  for (const double v : table.x.data()) {
    if (!std::isfinite(v)) {
      throw ValidationError({"non-finite feature value in assembled table"});
    }
  }
  for (const double v : table.target) {
    if (!std::isfinite(v)) {
      throw ValidationError({"non-finite target value in assembled table"});
    }
  }
  return table;
}

std::size_t FeatureTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < column_names.size(); ++j) {
    if (column_names[j] == name) {
      return j;
    }
  }
  throw UnknownFeature("no feature named '" + name + "'");
}

FeatureTable FeatureTable::select_features(const std::vector<std::string>& names) const {
  std::vector<std::size_t> indices;
  indices.reserve(names.size());
  for (const auto& name : names) {
    indices.push_back(column_index(name));
  }
  FeatureTable out;
  out.grid = grid;
  out.cell_ids = cell_ids;
  out.column_names = names;
  out.x = x.select_columns(indices);
  out.target = target;
  return out;
}

std::string FeatureTable::to_csv() const {
  std::string out = "cell_col,cell_row";
  for (const auto& name : column_names) {
    out += ',' + name;
  }
  out += ",target\n";
  for (std::size_t i = 0; i < cell_ids.size(); ++i) {
    out += std::to_string(cell_ids[i].col) + ',' + std::to_string(cell_ids[i].row);
    for (std::size_t j = 0; j < column_names.size(); ++j) {
      out += ',' + ingest::format_double(x(i, j));
    }
    out += ',' + ingest::format_double(target[i]) + '\n';
  }
  return out;
}

FeatureTable FeatureTable::from_csv(const std::string& text, const geo::GridSpec& grid) {
  FeatureTable table;
  table.grid = grid;

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header_seen = false;
  std::size_t n_fields = 0;
  while (start < text.size()) {
    std::size_t eol = text.find('\n', start);
    if (eol == std::string::npos) {
      eol = text.size();
    }
    std::string_view line(text.data() + start, eol - start);
    start = eol + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.remove_suffix(1);
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }

    std::vector<std::string_view> fields;
    std::size_t fstart = 0;
    while (true) {
      const std::size_t comma = line.find(',', fstart);
      if (comma == std::string_view::npos) {
        fields.push_back(line.substr(fstart));
        break;
      }
      fields.push_back(line.substr(fstart, comma - fstart));
      fstart = comma + 1;
    }

    if (!header_seen) {
      if (fields.size() < 3 || fields[0] != "cell_col" || fields[1] != "cell_row" ||
          fields.back() != "target") {
        throw ParseError("<feature table>", line_no, 1,
                         "expected header cell_col,cell_row,<features...>,target");
      }
      for (std::size_t j = 2; j + 1 < fields.size(); ++j) {
        table.column_names.emplace_back(fields[j]);
      }
      n_fields = fields.size();
      header_seen = true;
      continue;
    }
    if (fields.size() != n_fields) {
      throw ParseError("<feature table>", line_no, 1, "field count mismatch");
    }
    std::vector<double> row(n_fields);
    for (std::size_t j = 0; j < n_fields; ++j) {
      const auto f = fields[j];
      const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), row[j]);
      if (ec != std::errc{} || p != f.data() + f.size() || !std::isfinite(row[j])) {
        throw ParseError("<feature table>", line_no, j + 1, "bad value '" + std::string(f) + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) {
    throw ParseError("<feature table>", 1, 1, "missing header line");
  }

  const std::size_t p = table.column_names.size();
  table.x = ml::Matrix(rows.size(), p);
  table.target.resize(rows.size());
  table.cell_ids.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.cell_ids[i] = {static_cast<std::int32_t>(rows[i][0]),
                         static_cast<std::int32_t>(rows[i][1])};
    if (!grid.contains(table.cell_ids[i])) {
      throw ValidationError({"row " + std::to_string(i) + ": cell outside grid"});
    }
    for (std::size_t j = 0; j < p; ++j) {
      table.x(i, j) = rows[i][2 + j];
    }
    table.target[i] = rows[i][2 + p];
  }
  return table;
}

void FeatureTable::save_csv(const std::string& path) const {
  ingest::write_text_file(path, to_csv());
}

FeatureTable FeatureTable::load_csv(const std::string& path, const geo::GridSpec& grid) {
  return from_csv(ingest::read_text_file(path), grid);
}

}  // namespace sdk::features

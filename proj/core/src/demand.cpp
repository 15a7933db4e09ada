#include "sdk/demand.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "sdk/errors.hpp"

namespace sdk::demand {

namespace {

void require_same_grid(const CellSeries& a, const CellSeries& b) {
  if (!(a.grid() == b.grid())) {
    throw GridMismatch("series '" + a.name() + "' and '" + b.name() + "' use different grids");
  }
}

double median_of(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) {
    return v[n / 2];
  }
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CellSeries demand_indicator(const std::vector<ingest::TrafficRecord>& traffic,
                            const propagation::FootprintMap& footprints,
                            const CellSeries* weights, const geo::GridSpec& grid,
                            TemporalReduction reduction) {
  if (weights != nullptr) {
    for (const auto& [cell, w] : weights->values()) {
      if (w < 0.0) {
        throw ValidationError({"negative weight at cell (" + std::to_string(cell.col) + ", " +
                               std::to_string(cell.row) + ")"});
      }
    }
  }

  // Per-site temporal reduction.
  struct HourAgg {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<std::string, std::map<int, HourAgg>> per_site;
  for (const auto& r : traffic) {
    auto& agg = per_site[r.site_id][r.hour];
    agg.sum += r.dl_throughput_mbps;
    agg.n += 1;
  }

  CellSeries out(grid, "demand_indicator", "mbps");
  for (const auto& [site_id, hours] : per_site) {
    const auto fp = footprints.find(site_id);
    if (fp == footprints.end()) {
      throw MissingFootprint(site_id);
    }
    double site_value = 0.0;
    if (reduction == TemporalReduction::kMeanHour) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& [hour, agg] : hours) {
        sum += agg.sum;
        n += agg.n;
      }
      site_value = n == 0 ? 0.0 : sum / static_cast<double>(n);
    } else {
      for (const auto& [hour, agg] : hours) {
        site_value = std::max(site_value, agg.sum / static_cast<double>(agg.n));
      }
    }
    for (const auto& [cell, rx] : fp->second.cells) {
      out.add(cell, site_value);
    }
  }

  if (weights != nullptr) {
    CellSeries weighted(grid, out.name(), out.units());
    for (const auto& [cell, v] : out.values()) {
      weighted.set(cell, v * weights->at(cell));
    }
    return weighted;
  }
  return out;
}

CellSeries user_weight_series(const std::vector<ingest::MeasurementRecord>& measurements,
                              const geo::GridSpec& grid) {
  CellSeries sums(grid, "user_weights", "fraction");
  for (const auto& m : measurements) {
    if (const auto cell = geo::locate(m.location, grid)) {
      sums.add(*cell, static_cast<double>(m.samples));
    }
  }
  const double max = sums.max_value();
  CellSeries out(grid, "user_weights", "fraction");
  if (max <= 0.0) {
    // Degenerate input: neutral weighting everywhere.
    for (std::int32_t row = 0; row < grid.n_rows; ++row) {
      for (std::int32_t col = 0; col < grid.n_cols; ++col) {
        out.set({col, row}, 1.0);
      }
    }
    return out;
  }
  for (const auto& [cell, v] : sums.values()) {
    out.set(cell, v / max);
  }
  return out;
}

CellSeries deployed_bandwidth(const std::vector<propagation::SiteRecord>& sites,
                              const propagation::FootprintMap& footprints,
                              const geo::GridSpec& grid) {
  CellSeries out(grid, "deployed_bandwidth", "mhz");
  for (const auto& site : sites) {
    const auto fp = footprints.find(site.site_id);
    if (fp == footprints.end()) {
      throw MissingFootprint(site.site_id);
    }
    for (const auto& [cell, rx] : fp->second.cells) {
      out.add(cell, site.bandwidth_mhz);
    }
  }
  return out;
}

CellSeries ntl_weight_series(const ingest::RasterGrid& raster, const geo::GridSpec& grid) {
  std::map<geo::CellId, std::vector<double>> pixels;
  std::vector<double> all_values;
  for (std::int32_t row = 0; row < raster.n_rows; ++row) {
    for (std::int32_t col = 0; col < raster.n_cols; ++col) {
      const double v = raster.at(col, row);
      if (v == raster.nodata) {
        continue;
      }
      if (const auto cell = geo::locate(raster.pixel_center(col, row), grid)) {
        pixels[*cell].push_back(v);
        all_values.push_back(v);
      }
    }
  }
  if (all_values.empty()) {
    throw NoOverlap("no valid raster pixel center falls inside the grid");
  }
  const double grid_median = median_of(all_values);

  CellSeries medians(grid, "ntl_weights", "fraction");
  for (std::int32_t row = 0; row < grid.n_rows; ++row) {
    for (std::int32_t col = 0; col < grid.n_cols; ++col) {
      const geo::CellId cell{col, row};
      const auto it = pixels.find(cell);
      if (it == pixels.end()) {
        medians.set(cell, grid_median);
      } else {
        medians.set(cell, median_of(it->second));
      }
    }
  }

  const double max = medians.max_value();
  if (max <= 0.0) {
    CellSeries out(grid, "ntl_weights", "fraction");
    for (std::int32_t row = 0; row < grid.n_rows; ++row) {
      for (std::int32_t col = 0; col < grid.n_cols; ++col) {
        out.set({col, row}, 1.0);
      }
    }
    return out;
  }
  CellSeries out(grid, "ntl_weights", "fraction");
  for (const auto& [cell, v] : medians.values()) {
    out.set(cell, v / max);
  }
  return out;
}

CellSeries weighted_proxy(const CellSeries& bandwidth, const CellSeries& ntl_weights) {
  require_same_grid(bandwidth, ntl_weights);
  CellSeries out(bandwidth.grid(), "weighted_proxy", "mhz");
  for (const auto& [cell, v] : bandwidth.values()) {
    out.set(cell, v * ntl_weights.at(cell));
  }
  return out;
}

OlsFit ols_validate(const CellSeries& proxy, const CellSeries& indicator) {
  require_same_grid(proxy, indicator);
  std::set<geo::CellId> cells;
  for (const auto& [cell, v] : proxy.values()) cells.insert(cell);
  for (const auto& [cell, v] : indicator.values()) cells.insert(cell);
  const std::size_t n = cells.size();
  if (n < 3) {
    throw DegenerateVariance("need at least 3 populated cells, got " + std::to_string(n));
  }

  double sum_x = 0.0;
  double sum_y = 0.0;
  for (const auto& cell : cells) {
    sum_x += proxy.at(cell);
    sum_y += indicator.at(cell);
  }
  const double mean_x = sum_x / static_cast<double>(n);
  const double mean_y = sum_y / static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& cell : cells) {
    const double dx = proxy.at(cell) - mean_x;
    const double dy = indicator.at(cell) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) {
    throw DegenerateVariance("proxy variance is zero");
  }
  if (syy <= 0.0) {
    throw DegenerateVariance("indicator variance is zero");
  }

  OlsFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  double sse = 0.0;
  for (const auto& cell : cells) {
    const double resid = indicator.at(cell) - (fit.intercept + fit.slope * proxy.at(cell));
    sse += resid * resid;
  }
  fit.r_squared = 1.0 - sse / syy;
  fit.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);
  return fit;
}

}  // namespace sdk::demand

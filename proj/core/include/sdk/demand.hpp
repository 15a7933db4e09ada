#pragma once

#include <vector>

#include "sdk/cell_series.hpp"
#include "sdk/ingest.hpp"
#include "sdk/propagation.hpp"

namespace sdk::demand {

/// Simple linear regression summary of indicator on proxy.
struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// How hourly traffic collapses to one value per transmitter.
enum class TemporalReduction {
  kMeanHour,  // mean over all (date, hour) rows
  kBusyHour,  // max over hours of the per-hour mean across dates
};

/// Spectrum demand indicator: per-transmitter throughput assigned in full to
/// every grid cell in its footprint, then optionally scaled per cell by a
/// normalized weight series.
CellSeries demand_indicator(const std::vector<ingest::TrafficRecord>& traffic,
                            const propagation::FootprintMap& footprints,
                            const CellSeries* weights, const geo::GridSpec& grid,
                            TemporalReduction reduction = TemporalReduction::kMeanHour);

/// Per-cell crowdsourced sample counts, max-normalized to [0, 1]. Empty or
/// all-zero measurements yield a uniform all-ones series (neutral weighting).
CellSeries user_weight_series(const std::vector<ingest::MeasurementRecord>& measurements,
                              const geo::GridSpec& grid);

/// Total deployed bandwidth: per cell, the sum of bandwidth_mhz over all
/// sites whose footprint covers the cell.
CellSeries deployed_bandwidth(const std::vector<propagation::SiteRecord>& sites,
                              const propagation::FootprintMap& footprints,
                              const geo::GridSpec& grid);

/// Per-cell median raster luminance (nodata excluded), max-normalized to
/// [0, 1]; cells without pixels receive the grid-wide median before
/// normalization. Throws NoOverlap when no pixel center lands in the grid.
CellSeries ntl_weight_series(const ingest::RasterGrid& raster, const geo::GridSpec& grid);

/// Element-wise product of bandwidth and weights; the spectrum demand proxy.
CellSeries weighted_proxy(const CellSeries& bandwidth, const CellSeries& ntl_weights);

/// OLS of indicator (y) on proxy (x) over the union of populated cells in
/// either series (absent values read as 0).
OlsFit ols_validate(const CellSeries& proxy, const CellSeries& indicator);

}  // namespace sdk::demand

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdk/cell_series.hpp"
#include "sdk/ingest.hpp"
#include "sdk/ml/matrix.hpp"

namespace sdk::features {

/// Grid-aligned regression dataset: one row per included cell, named feature
/// columns plus a target column. No non-finite values; column names unique.
struct FeatureTable {
  geo::GridSpec grid;
  std::vector<geo::CellId> cell_ids;  // row order, row-major by CellId
  std::vector<std::string> column_names;
  ml::Matrix x;                  // cell_ids.size() x column_names.size()
  std::vector<double> target;

  std::size_t n_rows() const { return cell_ids.size(); }
  std::size_t n_features() const { return column_names.size(); }
  std::size_t column_index(const std::string& name) const;  // throws UnknownFeature

  /// Table restricted to the named columns, same rows and target.
  FeatureTable select_features(const std::vector<std::string>& names) const;

  /// CSV round-trip, header: cell_col,cell_row,<feature...>,target.
  std::string to_csv() const;
  static FeatureTable from_csv(const std::string& text, const geo::GridSpec& grid);
  void save_csv(const std::string& path) const;
  static FeatureTable load_csv(const std::string& path, const geo::GridSpec& grid);
};

/// Result of rasterizing a point source; points outside the grid are dropped
/// and counted.
struct PointRasterization {
  CellSeries counts;
  std::size_t outside_count = 0;
};

/// Polygon values onto the grid. Extensive values split across intersecting
/// cells proportionally to overlap area; intensive values become the
/// overlap-area-weighted mean of the polygons covering each cell. Throws
/// GeometryError on self-intersecting or zero-area rings.
CellSeries rasterize_polygon_value(const ingest::FeatureSource& src, const geo::GridSpec& grid);

/// Point count per cell via geo::locate.
PointRasterization rasterize_points(const ingest::FeatureSource& src, const geo::GridSpec& grid);

/// Total clipped polyline length in meters per cell.
CellSeries rasterize_lines(const ingest::FeatureSource& src, const geo::GridSpec& grid);

enum class MaskRule {
  kAnyNonzero,     // cells where target != 0 or any feature != 0 (default)
  kTargetNonzero,  // cells where target != 0
  kAllCells,       // every grid cell
};

/// Joins feature columns and the target into a FeatureTable. All series must
/// share the grid; duplicate column names are rejected; an empty selection
/// raises EmptyTable.
FeatureTable assemble(const std::vector<CellSeries>& columns, const CellSeries& target,
                      MaskRule mask = MaskRule::kAnyNonzero);

/// Per-method and aggregate feature importance scores. Every score vector
/// sums to 1.
struct ImportanceReport {
  std::vector<std::string> feature_names;
  std::map<std::string, std::vector<double>> per_method;  // method name -> scores
  std::vector<double> aggregate;

  std::string to_json() const;
  static ImportanceReport from_json(const std::string& text);

  /// Feature names sorted by aggregate importance, descending; ties broken
  /// by name for determinism.
  std::vector<std::string> ranking() const;
};

struct RankParams {
  double lasso_alpha = 0.01;
  double ridge_alpha = 0.1;
  std::size_t permutation_repeats = 5;
  double permutation_holdout = 0.25;
};

/// Ensemble feature ranking: random forest and GBR gain importance, |coef|
/// of lasso and ridge fits, and permutation importance of a GBR scored on a
/// holdout. Each method's raw scores are sum-normalized (an all-zero vector
/// becomes uniform) and the aggregate is their unweighted mean.
ImportanceReport rank_features(const FeatureTable& table, std::uint64_t seed,
                               const RankParams& params = {});

}  // namespace sdk::features

#pragma once

#include <map>
#include <string>

#include "sdk/geo.hpp"

namespace sdk {

/// Sparse per-cell scalar field on a grid. Cells absent from the map read as
/// zero. Iteration order is row-major (CellId ordering), so serialization is
/// deterministic.
class CellSeries {
 public:
  CellSeries() = default;
  CellSeries(geo::GridSpec grid, std::string name, std::string units)
      : grid_(std::move(grid)), name_(std::move(name)), units_(std::move(units)) {}

  const geo::GridSpec& grid() const { return grid_; }
  const std::string& name() const { return name_; }
  const std::string& units() const { return units_; }
  void set_name(std::string name) { name_ = std::move(name); }

  double at(geo::CellId c) const {
    const auto it = values_.find(c);
    return it == values_.end() ? 0.0 : it->second;
  }
  void set(geo::CellId c, double v) { values_[c] = v; }
  void add(geo::CellId c, double v) { values_[c] += v; }

  const std::map<geo::CellId, double>& values() const { return values_; }
  std::size_t populated_count() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  /// Largest stored value, 0 when empty.
  double max_value() const;

  /// CSV round-trip, header col,row,value, rows sorted row-major.
  std::string to_csv() const;
  static CellSeries from_csv(const std::string& csv_text, const geo::GridSpec& grid,
                             std::string name = "", std::string units = "");

  void save_csv(const std::string& path) const;
  static CellSeries load_csv(const std::string& path, const geo::GridSpec& grid,
                             std::string name = "", std::string units = "");

 private:
  geo::GridSpec grid_;
  std::string name_;
  std::string units_;
  std::map<geo::CellId, double> values_;
};

}  // namespace sdk

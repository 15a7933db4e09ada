#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sdk/geo.hpp"

namespace sdk::propagation {

enum class Environment { kUrban, kSuburban, kOpen };

std::string to_string(Environment env);
Environment environment_from_string(const std::string& s);

/// One transmitter row from the deployment file.
struct SiteRecord {
  std::string site_id;
  geo::GeoPoint location;
  double tx_power_dbm = 0.0;
  double antenna_height_m = 30.0;   // 1..300
  double center_freq_mhz = 900.0;   // 150..3000
  double bandwidth_mhz = 10.0;      // > 0
  Environment environment = Environment::kUrban;
};

/// Grid cells whose centers receive a site's signal above the threshold.
struct CoverageFootprint {
  std::string site_id;
  std::vector<std::pair<geo::CellId, double>> cells;  // (cell, received power dBm), cell-sorted
};

/// Model validity bounds. Distances below kMinDistKm clamp; everything else
/// throws OutOfValidityRange.
inline constexpr double kMinDistKm = 0.04;
inline constexpr double kMaxDistKm = 100.0;
inline constexpr double kMinFreqMhz = 150.0;
inline constexpr double kMaxFreqMhz = 3000.0;
inline constexpr double kMinBaseHeightM = 30.0;
inline constexpr double kMaxBaseHeightM = 200.0;
inline constexpr double kMinMobileHeightM = 1.0;
inline constexpr double kMaxMobileHeightM = 10.0;

/// Median path loss in dB of the Hata family:
///   150-1500 MHz   classic Okumura-Hata,
///   1500-3000 MHz  COST-231-style extension (+3 dB in urban areas),
/// with the standard suburban and open-area corrections. The exact constants
/// are normative and documented in the README. The 1500 MHz boundary uses the
/// classic branch; the two branches are not continuous there.
double path_loss_db(double freq_mhz, double dist_km, double h_base_m, double h_mobile_m,
                    Environment env);

/// Largest distance at which the received power still meets rx_threshold_dbm,
/// found by bisection on [0.04, 100] km to 1 m. Returns 0.04 when even the
/// minimum distance fails and 100 when the threshold is never violated.
double coverage_radius_km(const SiteRecord& site, double rx_threshold_dbm, double h_mobile_m);

/// All in-grid cells whose centers lie within coverage_radius_km of the site,
/// with the received power at each cell center. Deterministic; empty when the
/// site covers no cell.
CoverageFootprint footprint(const SiteRecord& site, const geo::GridSpec& grid,
                            double rx_threshold_dbm, double h_mobile_m = 1.5);

using FootprintMap = std::unordered_map<std::string, CoverageFootprint>;

/// Footprints for every site, keyed by site_id.
FootprintMap footprints(const std::vector<SiteRecord>& sites, const geo::GridSpec& grid,
                        double rx_threshold_dbm, double h_mobile_m = 1.5);

}  // namespace sdk::propagation

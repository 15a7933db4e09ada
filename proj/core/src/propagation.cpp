#include "sdk/propagation.hpp"

#include <algorithm>
#include <cmath>

#include "sdk/errors.hpp"

namespace sdk::propagation {

std::string to_string(Environment env) {
  switch (env) {
    case Environment::kUrban:
      return "urban";
    case Environment::kSuburban:
      return "suburban";
    case Environment::kOpen:
      return "open";
  }
  return "urban";
}

Environment environment_from_string(const std::string& s) {
  if (s == "urban") return Environment::kUrban;
  if (s == "suburban") return Environment::kSuburban;
  if (s == "open") return Environment::kOpen;
  throw ValidationError({"unknown environment '" + s + "' (expected urban|suburban|open)"});
}

double path_loss_db(double freq_mhz, double dist_km, double h_base_m, double h_mobile_m,
                    Environment env) {
  if (freq_mhz < kMinFreqMhz || freq_mhz > kMaxFreqMhz) {
    throw OutOfValidityRange("frequency " + std::to_string(freq_mhz) + " MHz outside [150, 3000]");
  }
  if (h_base_m < kMinBaseHeightM || h_base_m > kMaxBaseHeightM) {
    throw OutOfValidityRange("base height " + std::to_string(h_base_m) + " m outside [30, 200]");
  }
  if (h_mobile_m < kMinMobileHeightM || h_mobile_m > kMaxMobileHeightM) {
    throw OutOfValidityRange("mobile height " + std::to_string(h_mobile_m) + " m outside [1, 10]");
  }
  if (dist_km > kMaxDistKm) {
    throw OutOfValidityRange("distance " + std::to_string(dist_km) + " km outside [0.04, 100]");
  }
  const double d = std::max(dist_km, kMinDistKm);  // near-field clamp

  const double lf = std::log10(freq_mhz);
  const double lhb = std::log10(h_base_m);
  const double mobile_corr = (1.1 * lf - 0.7) * h_mobile_m - (1.56 * lf - 0.8);
  const double dist_term = (44.9 - 6.55 * lhb) * std::log10(d);

  double loss;
  if (freq_mhz <= 1500.0) {
    loss = 69.55 + 26.16 * lf - 13.82 * lhb - mobile_corr + dist_term;
  } else {
    loss = 46.3 + 33.9 * lf - 13.82 * lhb - mobile_corr + dist_term +
           (env == Environment::kUrban ? 3.0 : 0.0);
  }

  if (env == Environment::kSuburban) {
    const double lr = std::log10(freq_mhz / 28.0);
    loss -= 2.0 * lr * lr + 5.4;
  } else if (env == Environment::kOpen) {
    loss -= 4.78 * lf * lf - 18.33 * lf + 40.94;
  }
  return loss;
}

double coverage_radius_km(const SiteRecord& site, double rx_threshold_dbm, double h_mobile_m) {
  const auto received = [&](double d) {
    return site.tx_power_dbm -
           path_loss_db(site.center_freq_mhz, d, site.antenna_height_m, h_mobile_m,
                        site.environment);
  };
  if (received(kMinDistKm) < rx_threshold_dbm) {
    return kMinDistKm;
  }
  if (received(kMaxDistKm) >= rx_threshold_dbm) {
    return kMaxDistKm;
  }
  // Invariant: received(lo) >= threshold > received(hi). Loss is strictly
  // increasing in distance, so bisection converges; 1 m precision.
  double lo = kMinDistKm;
  double hi = kMaxDistKm;
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    if (received(mid) >= rx_threshold_dbm) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

CoverageFootprint footprint(const SiteRecord& site, const geo::GridSpec& grid,
                            double rx_threshold_dbm, double h_mobile_m) {
  const double radius_km = coverage_radius_km(site, rx_threshold_dbm, h_mobile_m);
  const double radius_m = radius_km * 1000.0;
  const geo::ProjectedPoint s = geo::project(site.location, grid.projection_origin);

  // Candidate window: cells whose centers can be within radius of the site.
  const double cs = grid.cell_size_m;
  const auto clamp_col = [&](double x) {
    return std::clamp<std::int32_t>(static_cast<std::int32_t>(std::floor((x - grid.origin.x) / cs)),
                                    0, grid.n_cols - 1);
  };
  const auto clamp_row = [&](double y) {
    return std::clamp<std::int32_t>(static_cast<std::int32_t>(std::floor((y - grid.origin.y) / cs)),
                                    0, grid.n_rows - 1);
  };
  const std::int32_t c0 = clamp_col(s.x - radius_m);
  const std::int32_t c1 = clamp_col(s.x + radius_m);
  const std::int32_t r0 = clamp_row(s.y - radius_m);
  const std::int32_t r1 = clamp_row(s.y + radius_m);

  CoverageFootprint fp;
  fp.site_id = site.site_id;
  for (std::int32_t row = r0; row <= r1; ++row) {
    for (std::int32_t col = c0; col <= c1; ++col) {
      const geo::CellId cell{col, row};
      const geo::ProjectedPoint center = geo::cell_center(cell, grid);
      const double dist_km = std::hypot(center.x - s.x, center.y - s.y) / 1000.0;
      if (dist_km <= radius_km) {
        const double rx =
            site.tx_power_dbm - path_loss_db(site.center_freq_mhz, std::max(dist_km, kMinDistKm),
                                             site.antenna_height_m, h_mobile_m, site.environment);
        fp.cells.emplace_back(cell, rx);
      }
    }
  }
  return fp;
}

FootprintMap footprints(const std::vector<SiteRecord>& sites, const geo::GridSpec& grid,
                        double rx_threshold_dbm, double h_mobile_m) {
  FootprintMap map;
  map.reserve(sites.size());
  for (const auto& site : sites) {
    map.emplace(site.site_id, footprint(site, grid, rx_threshold_dbm, h_mobile_m));
  }
  return map;
}

}  // namespace sdk::propagation

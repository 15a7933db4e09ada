#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sdk/geo.hpp"

namespace sdk::synth {

/// Synthetic city parameters. The planted demand law and its coefficients
/// are fixed by the generator (recorded in truth.json) so that two cities
/// generated from the same spec with different seeds share the law exactly.
struct CitySpec {
  std::uint64_t seed = 1;
  double extent_km = 45.0;       // square city side; >= 10 cells
  double cell_size_m = 1500.0;
  geo::GeoPoint origin{45.0, -75.0};  // SW corner of the bbox
  std::size_t n_sites = 1400;    // approximate transmitter count
  std::size_t n_hub_clusters = 6;  // bumps in the latent activity surface
  double rho_target = 0.9;       // signal share of target variance, (0, 1]
  double indicator_scale = 2.0;  // linear scale between proxy and indicator
  double rx_threshold_dbm = -95.0;
  double mobile_height_m = 1.5;
};

/// Deterministic monotone transform linking an emitted feature to the
/// planted law: hinge max(f/scale - param, 0), pow (f/scale)^param,
/// sqrt(f/scale), or log1p(f/scale).
struct Transform {
  std::string kind;
  double scale = 1.0;
  double param = 0.0;

  double apply(double f) const;
};

/// The generator's ground truth, written alongside the dataset.
struct Truth {
  std::uint64_t seed = 0;
  double rho_target = 1.0;
  double beta0 = 0.0;
  std::vector<std::string> feature_names;      // every emitted feature, column order
  std::vector<std::string> relevant_features;  // features with nonzero beta
  std::map<std::string, double> betas;
  std::map<std::string, Transform> transforms;
  double indicator_scale = 1.0;
  double indicator_offset = 0.0;
  double sigma_target_noise = 0.0;
  std::size_t n_clamped = 0;

  void save(const std::string& path) const;
  static Truth load(const std::string& path);
};

struct GenerateResult {
  geo::GridSpec grid;
  std::size_t n_cells = 0;
  std::size_t n_sites = 0;
  /// Largest relative error between the intended target and the proxy
  /// recomputed through the propagation/demand pipeline.
  double proxy_check_max_rel_err = 0.0;
};

/// Writes a complete dataset into out_dir: sites.csv, traffic.csv,
/// measurements.csv, ntl.asc, features/*.geojson with a manifest, and
/// truth.json. Every file parses through the ingest module, and the demand
/// pipeline's weighted proxy reproduces the planted target exactly.
GenerateResult generate(const CitySpec& spec, const std::string& out_dir);

/// Two datasets sharing the planted law (same betas and transforms),
/// differing only in their seeds.
std::pair<GenerateResult, GenerateResult> twin_cities(const CitySpec& spec, std::uint64_t seed_a,
                                                      std::uint64_t seed_b,
                                                      const std::string& dir_a,
                                                      const std::string& dir_b);

}  // namespace sdk::synth

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdk/demand.hpp"
#include "sdk/features.hpp"
#include "sdk/pipeline.hpp"
#include "sdk/synth.hpp"

namespace sdkcli {

/// One shared configuration file for every pipeline stage; flags override
/// individual entries. Defaults follow the documented methodology settings.
struct RunConfig {
  std::string config_path;
  std::string dataset_dir;
  std::string output_dir = "runs";
  std::optional<std::string> run_dir_override;
  std::uint64_t seed = 42;

  struct Grid {
    // When the bbox is absent it is derived from synth.origin/extent.
    std::optional<double> min_lat, min_lon, max_lat, max_lon;
    double cell_size_m = 1500.0;
  } grid;

  struct Propagation {
    double rx_threshold_dbm = -95.0;
    double mobile_height_m = 1.5;
  } propagation;

  struct Demand {
    sdk::demand::TemporalReduction reduction = sdk::demand::TemporalReduction::kMeanHour;
    bool apply_user_weights = true;
  } demand;

  struct Features {
    sdk::features::MaskRule mask = sdk::features::MaskRule::kAnyNonzero;
    bool per_km2 = false;
  } features;

  struct Model {
    std::vector<sdk::pipeline::ModelKind> models = {sdk::pipeline::ModelKind::kBaselineOls,
                                                    sdk::pipeline::ModelKind::kRidge,
                                                    sdk::pipeline::ModelKind::kGbr};
    sdk::pipeline::ScenarioMode mode = sdk::pipeline::ScenarioMode::kCombined;
    std::string baseline_feature = "transport_hubs";
    double ridge_alpha = 0.1;
    sdk::ml::GbrParams gbr;
    std::size_t k_clusters = 15;
    double train_frac = 0.8;
    std::size_t cv_folds = 5;
    std::optional<std::string> test_features;  // cross-region: test table csv
    std::optional<std::string> test_grid;      // cross-region: test grid json
  } model;

  struct Rank {
    sdk::features::RankParams params;
  } rank;

  struct Reduce {
    std::size_t top_n = 5;
    sdk::pipeline::ModelKind model = sdk::pipeline::ModelKind::kGbr;
  } reduce;

  sdk::synth::CitySpec synth;

  /// Effective run directory: the override, or output_dir/run-<config hash>.
  std::string run_dir() const;

  /// Hash of the effective configuration (after flag overrides), hex.
  std::string config_hash() const;

  /// Canonical JSON of the effective configuration.
  std::string to_json() const;

  sdk::pipeline::ScenarioConfig scenario_config(const std::string& name) const;

  static RunConfig load(const std::string& path);
};

}  // namespace sdkcli

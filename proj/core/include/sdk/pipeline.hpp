#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdk/features.hpp"
#include "sdk/ml/gbr.hpp"
#include "sdk/ml/metrics.hpp"

namespace sdk::pipeline {

/// Spatially clustered train/test partition. Cells are clustered by k-means
/// on their projected centroids, then split within each cluster.
struct SplitPlan {
  std::size_t k = 15;
  double train_frac = 0.8;
  std::uint64_t seed = 0;
  std::vector<std::size_t> cluster_of;  // per table row
  std::vector<std::size_t> train_rows;  // row indices into the source table
  std::vector<std::size_t> test_rows;
};

/// K-means clustering of the table's cell centroids followed by a seeded
/// within-cluster shuffle; the first round(train_frac * m) cells of each
/// cluster (at least 1) go to train. Clusters of size 1 train.
SplitPlan spatial_split(const features::FeatureTable& table, std::size_t k, double train_frac,
                        std::uint64_t seed);

enum class ScenarioMode { kCombined, kCrossRegion };
enum class ModelKind { kBaselineOls, kRidge, kGbr };

std::string to_string(ScenarioMode mode);
std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);
ScenarioMode scenario_mode_from_string(const std::string& s);

struct ScenarioConfig {
  ScenarioMode mode = ScenarioMode::kCombined;
  std::string scenario_name = "combined";
  std::vector<ModelKind> models = {ModelKind::kRidge, ModelKind::kGbr};
  double ridge_alpha = 0.1;
  ml::GbrParams gbr;
  std::size_t k_clusters = 15;
  double train_frac = 0.8;
  std::size_t cv_folds = 5;
  std::string baseline_feature;  // used by ModelKind::kBaselineOls
};

/// Everything needed to reproduce and audit one trained model: the model
/// itself, its evaluation, the split it saw, and fingerprints of its inputs.
struct ModelArtifact {
  std::string scenario;
  ScenarioMode mode = ScenarioMode::kCombined;
  ModelKind kind = ModelKind::kGbr;
  std::vector<std::string> feature_names;
  std::string model_json;
  double test_r2 = 0.0;
  double test_rmse = 0.0;
  ml::CvResult cv;
  features::ImportanceReport importance;
  std::optional<SplitPlan> split;  // combined mode only
  std::uint64_t seed = 0;
  std::string config_json;
  std::string train_fingerprint;
  std::string test_fingerprint;
  std::optional<double> delta_r2_vs_full;  // reduced runs only

  std::string to_json() const;
  static ModelArtifact from_json(const std::string& text);
  void save(const std::string& path) const;
  static ModelArtifact load(const std::string& path);
};

/// Content hash of a table (FNV-1a 64 over its canonical CSV form), hex.
std::string table_fingerprint(const features::FeatureTable& table);

/// Materializes the stored model as a predictor over rows with the
/// artifact's feature layout.
ml::Predictor artifact_predictor(const ModelArtifact& artifact);

/// Single-feature OLS over all rows; the linear baseline.
ModelArtifact run_baseline(const features::FeatureTable& table, const std::string& feature_name);

/// Runs the configured models on one scenario. Combined mode spatially
/// splits train_table (test_table must be the same data); cross-region mode
/// trains on all of train_table and tests on all of test_table. Both models
/// see the same split. Throws SchemaMismatch when feature columns differ.
std::vector<ModelArtifact> run_scenario(const features::FeatureTable& train_table,
                                        const features::FeatureTable& test_table,
                                        const ScenarioConfig& cfg, std::uint64_t seed);

/// Re-runs an artifact's scenario restricted to its top_n features by
/// aggregate importance, reusing the stored split. Records the R² change
/// against the full model.
ModelArtifact run_reduced(const ModelArtifact& artifact, const features::FeatureTable& train_table,
                          const features::FeatureTable& test_table, std::size_t top_n);

struct Metrics {
  double r2 = 0.0;
  double rmse = 0.0;
};

/// Recomputes test metrics from the stored model and split; used to verify
/// artifact integrity. Throws ValidationError when the tables do not match
/// the stored fingerprints.
Metrics recompute_metrics(const ModelArtifact& artifact, const features::FeatureTable& train_table,
                          const features::FeatureTable& test_table);

}  // namespace sdk::pipeline

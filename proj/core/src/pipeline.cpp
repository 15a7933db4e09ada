#include "sdk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sdk/errors.hpp"
#include "sdk/ml/importance.hpp"
#include "sdk/ml/kmeans.hpp"
#include "sdk/ml/linear.hpp"
#include "sdk/ml/serialize.hpp"
#include "sdk/rng.hpp"

namespace sdk::pipeline {

namespace {

using features::FeatureTable;
using features::ImportanceReport;

char hex_digit(std::uint64_t v) { return "0123456789abcdef"[v & 0xF]; }

std::string to_hex(std::uint64_t v) {
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex_digit(v);
    v >>= 4;
  }
  return out;
}

void require_same_schema(const FeatureTable& a, const FeatureTable& b) {
  if (a.column_names != b.column_names) {
    throw SchemaMismatch("train and test tables expose different feature columns");
  }
}

ImportanceReport single_method_report(const std::vector<std::string>& names,
                                      const std::string& method, std::vector<double> raw) {
  double total = 0.0;
  for (const double v : raw) {
    total += v;
  }
  if (total <= 0.0) {
    std::fill(raw.begin(), raw.end(), 1.0 / static_cast<double>(raw.size()));
  } else {
    for (double& v : raw) {
      v /= total;
    }
  }
  ImportanceReport report;
  report.feature_names = names;
  report.per_method[method] = raw;
  report.aggregate = std::move(raw);
  return report;
}

struct FittedModel {
  std::string model_json;
  ml::Predictor predictor;
  ImportanceReport importance;
};

FittedModel fit_model(ModelKind kind, const ScenarioConfig& cfg, const FeatureTable& table,
                      std::span<const std::size_t> rows, std::uint64_t seed) {
  const ml::Matrix x = table.x.select_rows(rows);
  const std::vector<double> y = ml::select(table.target, rows);

  FittedModel out;
  switch (kind) {
    case ModelKind::kRidge: {
      const ml::LinearModel model = ml::fit_ridge(x, y, cfg.ridge_alpha);
      out.model_json = ml::linear_to_json(model);
      out.predictor = [model](const ml::Matrix& m) { return model.predict(m); };
      std::vector<double> raw(model.coefficients.size());
      for (std::size_t j = 0; j < raw.size(); ++j) {
        raw[j] = std::abs(model.coefficients[j]);
      }
      out.importance = single_method_report(table.column_names, "coef", std::move(raw));
      break;
    }
    case ModelKind::kGbr: {
      const ml::GbrModel model = ml::fit_gbr(x, y, cfg.gbr, seed);
      out.model_json = ml::gbr_to_json(model);
      out.predictor = [model](const ml::Matrix& m) { return model.predict(m); };
      out.importance =
          single_method_report(table.column_names, "gain", ml::gain_importance(model));
      break;
    }
    case ModelKind::kBaselineOls: {
      const ml::LinearModel model = ml::fit_ols(x, y);
      out.model_json = ml::linear_to_json(model);
      out.predictor = [model](const ml::Matrix& m) { return model.predict(m); };
      std::vector<double> raw(model.coefficients.size());
      for (std::size_t j = 0; j < raw.size(); ++j) {
        raw[j] = std::abs(model.coefficients[j]);
      }
      out.importance = single_method_report(table.column_names, "coef", std::move(raw));
      break;
    }
  }
  return out;
}

ml::FitFn fit_fn_for(ModelKind kind, const ScenarioConfig& cfg, std::uint64_t seed) {
  switch (kind) {
    case ModelKind::kRidge:
      return [alpha = cfg.ridge_alpha](const ml::Matrix& x, std::span<const double> y) {
        const ml::LinearModel m = ml::fit_ridge(x, y, alpha);
        return ml::Predictor([m](const ml::Matrix& t) { return m.predict(t); });
      };
    case ModelKind::kGbr:
      return [params = cfg.gbr, seed](const ml::Matrix& x, std::span<const double> y) {
        const ml::GbrModel m = ml::fit_gbr(x, y, params, seed);
        return ml::Predictor([m](const ml::Matrix& t) { return m.predict(t); });
      };
    case ModelKind::kBaselineOls:
      return [](const ml::Matrix& x, std::span<const double> y) {
        const ml::LinearModel m = ml::fit_ols(x, y, /*ridge_fallback=*/true);
        return ml::Predictor([m](const ml::Matrix& t) { return m.predict(t); });
      };
  }
  throw Error("unreachable model kind");
}

std::string scenario_config_json(const ScenarioConfig& cfg, std::uint64_t seed) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto kind : cfg.models) {
    models.push_back(to_string(kind));
  }
  nlohmann::json j{{"mode", to_string(cfg.mode)},
                   {"scenario", cfg.scenario_name},
                   {"models", models},
                   {"ridge_alpha", cfg.ridge_alpha},
                   {"gbr",
                    {{"n_estimators", cfg.gbr.n_estimators},
                     {"learning_rate", cfg.gbr.learning_rate},
                     {"max_depth", cfg.gbr.max_depth},
                     {"min_leaf", cfg.gbr.min_leaf}}},
                   {"k_clusters", cfg.k_clusters},
                   {"train_frac", cfg.train_frac},
                   {"cv_folds", cfg.cv_folds},
                   {"baseline_feature", cfg.baseline_feature},
                   {"seed", seed}};
  return j.dump();
}

}  // namespace

std::string to_string(ScenarioMode mode) {
  return mode == ScenarioMode::kCombined ? "combined" : "cross_region";
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBaselineOls:
      return "baseline";
    case ModelKind::kRidge:
      return "ridge";
    case ModelKind::kGbr:
      return "gbr";
  }
  return "gbr";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "baseline") return ModelKind::kBaselineOls;
  if (s == "ridge") return ModelKind::kRidge;
  if (s == "gbr") return ModelKind::kGbr;
  throw ValidationError({"unknown model kind '" + s + "' (expected baseline|ridge|gbr)"});
}

ScenarioMode scenario_mode_from_string(const std::string& s) {
  if (s == "combined") return ScenarioMode::kCombined;
  if (s == "cross_region") return ScenarioMode::kCrossRegion;
  throw ValidationError({"unknown scenario mode '" + s + "' (expected combined|cross_region)"});
}

std::string table_fingerprint(const FeatureTable& table) {
  return to_hex(fnv1a64(table.to_csv()));
}

SplitPlan spatial_split(const features::FeatureTable& table, std::size_t k, double train_frac,
                        std::uint64_t seed) {
  const std::size_t n = table.n_rows();
  if (n < k) {
    throw TooFewRows("spatial_split needs at least k rows (" + std::to_string(k) + "), got " +
                     std::to_string(n));
  }
  if (train_frac <= 0.0 || train_frac > 1.0) {
    throw ValidationError({"train_frac must be in (0, 1]"});
  }

  std::vector<ml::Point2> centroids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const geo::ProjectedPoint c = geo::cell_center(table.cell_ids[i], table.grid);
    centroids[i] = {c.x, c.y};
  }
  const ml::KMeansResult clustering = ml::kmeans(centroids, k, seed);

  SplitPlan plan;
  plan.k = k;
  plan.train_frac = train_frac;
  plan.seed = seed;
  plan.cluster_of = clustering.assignment;

  // Per-cluster seeded shuffle, clusters processed in index order.
  Rng rng(derive_seed(seed, "split-shuffle"));
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (plan.cluster_of[i] == c) {
        members.push_back(i);
      }
    }
    if (members.empty()) {
      continue;
    }
    rng.shuffle(members);
    // Round-half-up train count; singleton clusters go to train whole.
    const std::size_t n_train = std::min(
        members.size(),
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                     train_frac * static_cast<double>(members.size()) + 0.5))));
    for (std::size_t i = 0; i < members.size(); ++i) {
      (i < n_train ? plan.train_rows : plan.test_rows).push_back(members[i]);
    }
  }
  std::sort(plan.train_rows.begin(), plan.train_rows.end());
  std::sort(plan.test_rows.begin(), plan.test_rows.end());
  return plan;
}

ModelArtifact run_baseline(const features::FeatureTable& table, const std::string& feature_name) {
  const std::size_t j = table.column_index(feature_name);  // throws UnknownFeature

  ScenarioConfig cfg;
  cfg.mode = ScenarioMode::kCombined;
  cfg.scenario_name = "baseline";
  cfg.baseline_feature = feature_name;

  const FeatureTable single = table.select_features({table.column_names[j]});
  std::vector<std::size_t> all(single.n_rows());
  std::iota(all.begin(), all.end(), 0);

  const FittedModel fitted = fit_model(ModelKind::kBaselineOls, cfg, single, all, 0);
  const std::vector<double> pred = fitted.predictor(single.x);

  ModelArtifact artifact;
  artifact.scenario = "baseline";
  artifact.mode = ScenarioMode::kCombined;
  artifact.kind = ModelKind::kBaselineOls;
  artifact.feature_names = single.column_names;
  artifact.model_json = fitted.model_json;
  artifact.test_r2 = ml::r2(single.target, pred);
  artifact.test_rmse = ml::rmse(single.target, pred);
  artifact.cv = ml::kfold_cv(single.x, single.target, 5, fit_fn_for(ModelKind::kBaselineOls, cfg, 0), 0);
  artifact.importance = fitted.importance;
  artifact.seed = 0;
  artifact.config_json = scenario_config_json(cfg, 0);
  artifact.train_fingerprint = table_fingerprint(table);
  artifact.test_fingerprint = artifact.train_fingerprint;
  return artifact;
}

std::vector<ModelArtifact> run_scenario(const features::FeatureTable& train_table,
                                        const features::FeatureTable& test_table,
                                        const ScenarioConfig& cfg, std::uint64_t seed) {
  require_same_schema(train_table, test_table);

  std::optional<SplitPlan> split;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  const FeatureTable* eval_table = &test_table;
  if (cfg.mode == ScenarioMode::kCombined) {
    if (table_fingerprint(train_table) != table_fingerprint(test_table)) {
      throw SchemaMismatch("combined mode expects the same table for train and test");
    }
    split = spatial_split(train_table, cfg.k_clusters, cfg.train_frac, seed);
    train_rows = split->train_rows;
    test_rows = split->test_rows;
    eval_table = &train_table;
  } else {
    train_rows.resize(train_table.n_rows());
    std::iota(train_rows.begin(), train_rows.end(), 0);
    test_rows.resize(test_table.n_rows());
    std::iota(test_rows.begin(), test_rows.end(), 0);
  }

  std::vector<ModelArtifact> artifacts;
  for (const ModelKind kind : cfg.models) {
    if (kind == ModelKind::kBaselineOls) {
      ModelArtifact artifact = run_baseline(train_table, cfg.baseline_feature);
      artifact.scenario = cfg.scenario_name;
      artifacts.push_back(std::move(artifact));
      continue;
    }
    const std::uint64_t model_seed = derive_seed(seed, "model-" + to_string(kind));
    const FittedModel fitted = fit_model(kind, cfg, train_table, train_rows, model_seed);

    const ml::Matrix x_test = eval_table->x.select_rows(test_rows);
    const std::vector<double> y_test = ml::select(eval_table->target, test_rows);
    const std::vector<double> pred = fitted.predictor(x_test);

    ModelArtifact artifact;
    artifact.scenario = cfg.scenario_name;
    artifact.mode = cfg.mode;
    artifact.kind = kind;
    artifact.feature_names = train_table.column_names;
    artifact.model_json = fitted.model_json;
    artifact.test_r2 = ml::r2(y_test, pred);
    artifact.test_rmse = ml::rmse(y_test, pred);
    const ml::Matrix x_train = train_table.x.select_rows(train_rows);
    const std::vector<double> y_train = ml::select(train_table.target, train_rows);
    artifact.cv = ml::kfold_cv(x_train, y_train, cfg.cv_folds, fit_fn_for(kind, cfg, model_seed),
                               derive_seed(seed, "cv-" + to_string(kind)));
    artifact.importance = fitted.importance;
    artifact.split = split;
    artifact.seed = seed;
    artifact.config_json = scenario_config_json(cfg, seed);
    artifact.train_fingerprint = table_fingerprint(train_table);
    artifact.test_fingerprint = table_fingerprint(test_table);
    artifacts.push_back(std::move(artifact));
  }
  return artifacts;
}

ModelArtifact run_reduced(const ModelArtifact& artifact, const features::FeatureTable& train_table,
                          const features::FeatureTable& test_table, std::size_t top_n) {
  if (artifact.importance.feature_names.empty()) {
    throw TooFewFeatures("artifact carries no importance report");
  }
  if (top_n < 1 || top_n > artifact.feature_names.size()) {
    throw TooFewFeatures("top_n must be in [1, " + std::to_string(artifact.feature_names.size()) +
                         "]");
  }
  if (table_fingerprint(train_table) != artifact.train_fingerprint ||
      table_fingerprint(test_table) != artifact.test_fingerprint) {
    throw ValidationError({"tables do not match the artifact's input fingerprints"});
  }

  std::vector<std::string> ranked = artifact.importance.ranking();
  ranked.resize(top_n);

  const FeatureTable train_reduced = train_table.select_features(ranked);
  const FeatureTable test_reduced = test_table.select_features(ranked);

  ScenarioConfig cfg;
  {
    const nlohmann::json j = nlohmann::json::parse(artifact.config_json);
    cfg.mode = artifact.mode;
    cfg.scenario_name = artifact.scenario + "_top" + std::to_string(top_n);
    cfg.models = {artifact.kind};
    cfg.ridge_alpha = j.value("ridge_alpha", 0.1);
    cfg.gbr.n_estimators = j.at("gbr").value("n_estimators", cfg.gbr.n_estimators);
    cfg.gbr.learning_rate = j.at("gbr").value("learning_rate", cfg.gbr.learning_rate);
    cfg.gbr.max_depth = j.at("gbr").value("max_depth", cfg.gbr.max_depth);
    cfg.gbr.min_leaf = j.at("gbr").value("min_leaf", cfg.gbr.min_leaf);
    cfg.cv_folds = j.value("cv_folds", cfg.cv_folds);
    cfg.baseline_feature = ranked.front();
  }

  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  const FeatureTable* eval_table = &test_reduced;
  if (artifact.mode == ScenarioMode::kCombined) {
    if (!artifact.split) {
      throw ValidationError({"combined-mode artifact is missing its split plan"});
    }
    train_rows = artifact.split->train_rows;
    test_rows = artifact.split->test_rows;
    eval_table = &train_reduced;
  } else {
    train_rows.resize(train_reduced.n_rows());
    std::iota(train_rows.begin(), train_rows.end(), 0);
    test_rows.resize(test_reduced.n_rows());
    std::iota(test_rows.begin(), test_rows.end(), 0);
  }

  const std::uint64_t model_seed = derive_seed(artifact.seed, "model-" + to_string(artifact.kind));
  const FittedModel fitted = fit_model(artifact.kind, cfg, train_reduced, train_rows, model_seed);
  const ml::Matrix x_test = eval_table->x.select_rows(test_rows);
  const std::vector<double> y_test = ml::select(eval_table->target, test_rows);
  const std::vector<double> pred = fitted.predictor(x_test);

  ModelArtifact reduced;
  reduced.scenario = cfg.scenario_name;
  reduced.mode = artifact.mode;
  reduced.kind = artifact.kind;
  reduced.feature_names = ranked;
  reduced.model_json = fitted.model_json;
  reduced.test_r2 = ml::r2(y_test, pred);
  reduced.test_rmse = ml::rmse(y_test, pred);
  const ml::Matrix x_train = train_reduced.x.select_rows(train_rows);
  const std::vector<double> y_train = ml::select(train_reduced.target, train_rows);
  reduced.cv = ml::kfold_cv(x_train, y_train, cfg.cv_folds,
                            fit_fn_for(artifact.kind, cfg, model_seed),
                            derive_seed(artifact.seed, "cv-" + to_string(artifact.kind)));
  reduced.importance = fitted.importance;
  reduced.split = artifact.split;
  reduced.seed = artifact.seed;
  reduced.config_json = scenario_config_json(cfg, artifact.seed);
  reduced.train_fingerprint = artifact.train_fingerprint;
  reduced.test_fingerprint = artifact.test_fingerprint;
  reduced.delta_r2_vs_full = reduced.test_r2 - artifact.test_r2;
  return reduced;
}

Metrics recompute_metrics(const ModelArtifact& artifact, const features::FeatureTable& train_table,
                          const features::FeatureTable& test_table) {
  if (table_fingerprint(train_table) != artifact.train_fingerprint ||
      table_fingerprint(test_table) != artifact.test_fingerprint) {
    throw ValidationError({"tables do not match the artifact's input fingerprints"});
  }
  const FeatureTable train_sel = train_table.select_features(artifact.feature_names);
  const FeatureTable test_sel = test_table.select_features(artifact.feature_names);

  std::vector<std::size_t> test_rows;
  const FeatureTable* eval_table = &test_sel;
  if (artifact.mode == ScenarioMode::kCombined) {
    if (artifact.split) {
      test_rows = artifact.split->test_rows;
      eval_table = &train_sel;
    } else {
      // Baseline artifacts evaluate in-sample.
      test_rows.resize(train_sel.n_rows());
      std::iota(test_rows.begin(), test_rows.end(), 0);
      eval_table = &train_sel;
    }
  } else {
    test_rows.resize(test_sel.n_rows());
    std::iota(test_rows.begin(), test_rows.end(), 0);
  }

  const ml::Predictor predictor = artifact_predictor(artifact);
  const ml::Matrix x_test = eval_table->x.select_rows(test_rows);
  const std::vector<double> y_test = ml::select(eval_table->target, test_rows);
  const std::vector<double> pred = predictor(x_test);
  return {ml::r2(y_test, pred), ml::rmse(y_test, pred)};
}

ml::Predictor artifact_predictor(const ModelArtifact& artifact) {
  switch (artifact.kind) {
    case ModelKind::kRidge:
    case ModelKind::kBaselineOls: {
      const ml::LinearModel model = ml::linear_from_json(artifact.model_json);
      return [model](const ml::Matrix& m) { return model.predict(m); };
    }
    case ModelKind::kGbr: {
      const ml::GbrModel model = ml::gbr_from_json(artifact.model_json);
      return [model](const ml::Matrix& m) { return model.predict(m); };
    }
  }
  throw Error("unreachable model kind");
}

}  // namespace sdk::pipeline

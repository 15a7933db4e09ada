#include "config.hpp"

#include <nlohmann/json.hpp>

#include "sdk/errors.hpp"
#include "sdk/ingest.hpp"
#include "sdk/rng.hpp"

namespace sdkcli {

namespace {

using nlohmann::json;

std::string reduction_name(sdk::demand::TemporalReduction r) {
  return r == sdk::demand::TemporalReduction::kMeanHour ? "mean" : "busy_hour";
}

sdk::demand::TemporalReduction reduction_from(const std::string& s) {
  if (s == "mean") return sdk::demand::TemporalReduction::kMeanHour;
  if (s == "busy_hour") return sdk::demand::TemporalReduction::kBusyHour;
  throw sdk::ValidationError({"demand.temporal_reduction must be mean|busy_hour, got '" + s + "'"});
}

std::string mask_name(sdk::features::MaskRule m) {
  switch (m) {
    case sdk::features::MaskRule::kAnyNonzero:
      return "any_nonzero";
    case sdk::features::MaskRule::kTargetNonzero:
      return "target_nonzero";
    case sdk::features::MaskRule::kAllCells:
      return "all_cells";
  }
  return "any_nonzero";
}

sdk::features::MaskRule mask_from(const std::string& s) {
  if (s == "any_nonzero") return sdk::features::MaskRule::kAnyNonzero;
  if (s == "target_nonzero") return sdk::features::MaskRule::kTargetNonzero;
  if (s == "all_cells") return sdk::features::MaskRule::kAllCells;
  throw sdk::ValidationError(
      {"features.mask must be any_nonzero|target_nonzero|all_cells, got '" + s + "'"});
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  const json j = json::parse(sdk::ingest::read_text_file(path), nullptr,
                             /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw sdk::ParseError(path, 1, 1, "invalid JSON");
  }

  RunConfig cfg;
  cfg.config_path = path;
  cfg.dataset_dir = j.value("dataset_dir", "");
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  if (j.contains("run_dir") && !j.at("run_dir").is_null()) {
    cfg.run_dir_override = j.at("run_dir").get<std::string>();
  }
  cfg.seed = j.value("seed", cfg.seed);

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (g.contains("min_lat")) cfg.grid.min_lat = g.at("min_lat").get<double>();
    if (g.contains("min_lon")) cfg.grid.min_lon = g.at("min_lon").get<double>();
    if (g.contains("max_lat")) cfg.grid.max_lat = g.at("max_lat").get<double>();
    if (g.contains("max_lon")) cfg.grid.max_lon = g.at("max_lon").get<double>();
    cfg.grid.cell_size_m = g.value("cell_size_m", cfg.grid.cell_size_m);
    if (cfg.grid.cell_size_m <= 0.0) {
      throw sdk::ValidationError({"grid.cell_size_m must be > 0"});
    }
  }

  if (j.contains("propagation")) {
    const json& p = j.at("propagation");
    cfg.propagation.rx_threshold_dbm = p.value("rx_threshold_dbm", cfg.propagation.rx_threshold_dbm);
    cfg.propagation.mobile_height_m = p.value("mobile_height_m", cfg.propagation.mobile_height_m);
  }

  if (j.contains("demand")) {
    const json& d = j.at("demand");
    if (d.contains("temporal_reduction")) {
      cfg.demand.reduction = reduction_from(d.at("temporal_reduction").get<std::string>());
    }
    cfg.demand.apply_user_weights = d.value("apply_user_weights", cfg.demand.apply_user_weights);
  }

  if (j.contains("features")) {
    const json& f = j.at("features");
    if (f.contains("mask")) {
      cfg.features.mask = mask_from(f.at("mask").get<std::string>());
    }
    cfg.features.per_km2 = f.value("per_km2", cfg.features.per_km2);
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    if (m.contains("models")) {
      cfg.model.models.clear();
      for (const auto& name : m.at("models")) {
        cfg.model.models.push_back(sdk::pipeline::model_kind_from_string(name.get<std::string>()));
      }
    }
    if (m.contains("mode")) {
      cfg.model.mode = sdk::pipeline::scenario_mode_from_string(m.at("mode").get<std::string>());
    }
    cfg.model.baseline_feature = m.value("baseline_feature", cfg.model.baseline_feature);
    cfg.model.ridge_alpha = m.value("ridge_alpha", cfg.model.ridge_alpha);
    if (cfg.model.ridge_alpha < 0.0) {
      throw sdk::ValidationError({"model.ridge_alpha must be >= 0"});
    }
    if (m.contains("gbr")) {
      const json& g = m.at("gbr");
      cfg.model.gbr.n_estimators = g.value("n_estimators", cfg.model.gbr.n_estimators);
      cfg.model.gbr.learning_rate = g.value("learning_rate", cfg.model.gbr.learning_rate);
      cfg.model.gbr.max_depth = g.value("max_depth", cfg.model.gbr.max_depth);
      cfg.model.gbr.min_leaf = g.value("min_leaf", cfg.model.gbr.min_leaf);
    }
    cfg.model.k_clusters = m.value("k_clusters", cfg.model.k_clusters);
    cfg.model.train_frac = m.value("train_frac", cfg.model.train_frac);
    if (cfg.model.train_frac <= 0.0 || cfg.model.train_frac > 1.0) {
      throw sdk::ValidationError({"model.train_frac must be in (0, 1]"});
    }
    cfg.model.cv_folds = m.value("cv_folds", cfg.model.cv_folds);
    if (cfg.model.cv_folds < 2) {
      throw sdk::ValidationError({"model.cv_folds must be >= 2"});
    }
    if (m.contains("test_features") && !m.at("test_features").is_null()) {
      cfg.model.test_features = m.at("test_features").get<std::string>();
    }
    if (m.contains("test_grid") && !m.at("test_grid").is_null()) {
      cfg.model.test_grid = m.at("test_grid").get<std::string>();
    }
  }

  if (j.contains("rank")) {
    const json& r = j.at("rank");
    cfg.rank.params.lasso_alpha = r.value("lasso_alpha", cfg.rank.params.lasso_alpha);
    cfg.rank.params.ridge_alpha = r.value("ridge_alpha", cfg.rank.params.ridge_alpha);
    cfg.rank.params.permutation_repeats =
        r.value("permutation_repeats", cfg.rank.params.permutation_repeats);
  }

  if (j.contains("reduce")) {
    const json& r = j.at("reduce");
    cfg.reduce.top_n = r.value("top_n", cfg.reduce.top_n);
    if (r.contains("model")) {
      cfg.reduce.model = sdk::pipeline::model_kind_from_string(r.at("model").get<std::string>());
    }
  }

  if (j.contains("synth")) {
    const json& s = j.at("synth");
    cfg.synth.seed = s.value("seed", cfg.seed);
    cfg.synth.extent_km = s.value("extent_km", cfg.synth.extent_km);
    cfg.synth.cell_size_m = cfg.grid.cell_size_m;
    if (s.contains("origin_lat")) cfg.synth.origin.lat = s.at("origin_lat").get<double>();
    if (s.contains("origin_lon")) cfg.synth.origin.lon = s.at("origin_lon").get<double>();
    cfg.synth.n_sites = s.value("n_sites", cfg.synth.n_sites);
    cfg.synth.n_hub_clusters = s.value("n_hub_clusters", cfg.synth.n_hub_clusters);
    cfg.synth.rho_target = s.value("rho_target", cfg.synth.rho_target);
    cfg.synth.indicator_scale = s.value("indicator_scale", cfg.synth.indicator_scale);
  } else {
    cfg.synth.seed = cfg.seed;
    cfg.synth.cell_size_m = cfg.grid.cell_size_m;
  }
  cfg.synth.rx_threshold_dbm = cfg.propagation.rx_threshold_dbm;
  cfg.synth.mobile_height_m = cfg.propagation.mobile_height_m;
  return cfg;
}

std::string RunConfig::to_json() const {
  json grid_j{{"cell_size_m", grid.cell_size_m}};
  if (grid.min_lat) grid_j["min_lat"] = *grid.min_lat;
  if (grid.min_lon) grid_j["min_lon"] = *grid.min_lon;
  if (grid.max_lat) grid_j["max_lat"] = *grid.max_lat;
  if (grid.max_lon) grid_j["max_lon"] = *grid.max_lon;

  json models = json::array();
  for (const auto kind : model.models) {
    models.push_back(sdk::pipeline::to_string(kind));
  }
  json model_j{{"models", models},
               {"mode", sdk::pipeline::to_string(model.mode)},
               {"baseline_feature", model.baseline_feature},
               {"ridge_alpha", model.ridge_alpha},
               {"gbr",
                {{"n_estimators", model.gbr.n_estimators},
                 {"learning_rate", model.gbr.learning_rate},
                 {"max_depth", model.gbr.max_depth},
                 {"min_leaf", model.gbr.min_leaf}}},
               {"k_clusters", model.k_clusters},
               {"train_frac", model.train_frac},
               {"cv_folds", model.cv_folds}};
  if (model.test_features) model_j["test_features"] = *model.test_features;
  if (model.test_grid) model_j["test_grid"] = *model.test_grid;

  json j{{"dataset_dir", dataset_dir},
         {"output_dir", output_dir},
         {"seed", seed},
         {"grid", grid_j},
         {"propagation",
          {{"rx_threshold_dbm", propagation.rx_threshold_dbm},
           {"mobile_height_m", propagation.mobile_height_m}}},
         {"demand",
          {{"temporal_reduction", reduction_name(demand.reduction)},
           {"apply_user_weights", demand.apply_user_weights}}},
         {"features", {{"mask", mask_name(features.mask)}, {"per_km2", features.per_km2}}},
         {"model", model_j},
         {"rank",
          {{"lasso_alpha", rank.params.lasso_alpha},
           {"ridge_alpha", rank.params.ridge_alpha},
           {"permutation_repeats", rank.params.permutation_repeats}}},
         {"reduce",
          {{"top_n", reduce.top_n}, {"model", sdk::pipeline::to_string(reduce.model)}}},
         {"synth",
          {{"seed", synth.seed},
           {"extent_km", synth.extent_km},
           {"origin_lat", synth.origin.lat},
           {"origin_lon", synth.origin.lon},
           {"n_sites", synth.n_sites},
           {"n_hub_clusters", synth.n_hub_clusters},
           {"rho_target", synth.rho_target},
           {"indicator_scale", synth.indicator_scale}}}};
  return j.dump(2) + "\n";
}

std::string RunConfig::config_hash() const {
  const std::uint64_t h = sdk::fnv1a64(to_json());
  std::string out(16, '0');
  std::uint64_t v = h;
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = "0123456789abcdef"[v & 0xF];
    v >>= 4;
  }
  return out;
}

std::string RunConfig::run_dir() const {
  if (run_dir_override) {
    return *run_dir_override;
  }
  return output_dir + "/run-" + config_hash();
}

sdk::pipeline::ScenarioConfig RunConfig::scenario_config(const std::string& name) const {
  sdk::pipeline::ScenarioConfig cfg;
  cfg.mode = model.mode;
  cfg.scenario_name = name;
  cfg.models = model.models;
  cfg.ridge_alpha = model.ridge_alpha;
  cfg.gbr = model.gbr;
  cfg.k_clusters = model.k_clusters;
  cfg.train_frac = model.train_frac;
  cfg.cv_folds = model.cv_folds;
  cfg.baseline_feature = model.baseline_feature;
  return cfg;
}

}  // namespace sdkcli

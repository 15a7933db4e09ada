#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "log.hpp"
#include "sdk/demand.hpp"
#include "sdk/errors.hpp"
#include "sdk/features.hpp"
#include "sdk/geo.hpp"
#include "sdk/ingest.hpp"
#include "sdk/pipeline.hpp"
#include "sdk/propagation.hpp"
#include "sdk/synth.hpp"

namespace sdkcli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void summary(const std::string& stage, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string line = "stage=" + stage + " status=ok";
  for (const auto& [k, v] : kv) {
    line += " " + k + "=" + v;
  }
  std::cout << line << "\n";
}

void require_file(const std::string& path, const std::string& produced_by) {
  if (!fs::exists(path)) {
    throw sdk::IoError("missing " + path + "; run `sdk " + produced_by + "` first");
  }
}

void require_dataset(const RunConfig& cfg) {
  if (cfg.dataset_dir.empty() || !fs::exists(cfg.dataset_dir)) {
    throw sdk::IoError("dataset_dir '" + cfg.dataset_dir +
                       "' does not exist; run `sdk synth` or point dataset_dir at real data");
  }
}

std::string run_path(const RunConfig& cfg, const std::string& file) {
  return cfg.run_dir() + "/" + file;
}

sdk::geo::GridSpec load_run_grid(const RunConfig& cfg) {
  require_file(run_path(cfg, "grid.json"), "grid");
  return sdk::geo::load_grid(run_path(cfg, "grid.json"));
}

void ensure_run_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.run_dir());
  // Snapshot of the effective configuration, for reproducibility.
  sdk::ingest::write_text_file(run_path(cfg, "effective_config.json"), cfg.to_json());
}

sdk::propagation::FootprintMap compute_footprints(const RunConfig& cfg,
                                                  const std::vector<sdk::propagation::SiteRecord>& sites,
                                                  const sdk::geo::GridSpec& grid) {
  return sdk::propagation::footprints(sites, grid, cfg.propagation.rx_threshold_dbm,
                                      cfg.propagation.mobile_height_m);
}

struct BBox {
  sdk::geo::GeoPoint min, max;
};

BBox effective_bbox(const RunConfig& cfg) {
  if (cfg.grid.min_lat && cfg.grid.min_lon && cfg.grid.max_lat && cfg.grid.max_lon) {
    return {{*cfg.grid.min_lat, *cfg.grid.min_lon}, {*cfg.grid.max_lat, *cfg.grid.max_lon}};
  }
  // Fall back to the synthetic city's extent.
  const double extent_m = cfg.synth.extent_km * 1000.0;
  return {cfg.synth.origin, sdk::geo::unproject({extent_m, extent_m}, cfg.synth.origin)};
}

/// Columns measured per cell (counts, lengths, extensive masses) divide by
/// the cell area when per-km2 output is requested; intensive columns do not.
bool scales_per_area(const json& manifest_entry) {
  if (manifest_entry.value("kind", "") != "polygon_value") {
    return true;
  }
  return manifest_entry.value("allocation", "extensive") == "extensive";
}

std::vector<std::string> artifact_files(const RunConfig& cfg) {
  std::vector<std::string> files;
  if (!fs::exists(cfg.run_dir())) {
    return files;
  }
  for (const auto& entry : fs::directory_iterator(cfg.run_dir())) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("artifact_", 0) == 0 && name.size() > 5 &&
        name.substr(name.size() - 5) == ".json") {
      files.push_back(name);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Loads the cross-region test table when the scenario needs one; otherwise
/// returns a copy of the train table.
sdk::features::FeatureTable load_test_table(const RunConfig& cfg,
                                            const sdk::features::FeatureTable& train_table) {
  if (cfg.model.mode == sdk::pipeline::ScenarioMode::kCombined) {
    return train_table;
  }
  if (!cfg.model.test_features || !cfg.model.test_grid) {
    throw sdk::ValidationError(
        {"cross_region mode requires model.test_features and model.test_grid"});
  }
  require_file(*cfg.model.test_grid, "grid (in the test city's run directory)");
  require_file(*cfg.model.test_features, "features (in the test city's run directory)");
  const sdk::geo::GridSpec test_grid = sdk::geo::load_grid(*cfg.model.test_grid);
  return sdk::features::FeatureTable::load_csv(*cfg.model.test_features, test_grid);
}

}  // namespace

void cmd_synth(const RunConfig& cfg) {
  if (cfg.dataset_dir.empty()) {
    throw sdk::ValidationError({"config needs dataset_dir to know where to write the city"});
  }
  const auto result = sdk::synth::generate(cfg.synth, cfg.dataset_dir);
  summary("synth", {{"dir", cfg.dataset_dir},
                    {"cells", std::to_string(result.n_cells)},
                    {"sites", std::to_string(result.n_sites)},
                    {"proxy_check_rel_err", fmt(result.proxy_check_max_rel_err)}});
}

void cmd_grid(const RunConfig& cfg) {
  ensure_run_dir(cfg);
  const BBox bbox = effective_bbox(cfg);
  const sdk::geo::GridSpec grid = sdk::geo::make_grid(bbox.min, bbox.max, cfg.grid.cell_size_m);
  sdk::geo::save_grid(grid, run_path(cfg, "grid.json"));
  summary("grid", {{"n_cols", std::to_string(grid.n_cols)},
                   {"n_rows", std::to_string(grid.n_rows)},
                   {"cells", std::to_string(grid.cell_count())},
                   {"cell_size_m", fmt(grid.cell_size_m)}});
}

void cmd_proxy(const RunConfig& cfg) {
  require_dataset(cfg);
  ensure_run_dir(cfg);
  const auto grid = load_run_grid(cfg);
  require_file(cfg.dataset_dir + "/sites.csv", "synth");
  require_file(cfg.dataset_dir + "/ntl.asc", "synth");

  const auto sites = sdk::ingest::parse_sites(cfg.dataset_dir + "/sites.csv");
  const auto fps = compute_footprints(cfg, sites, grid);
  const auto bandwidth = sdk::demand::deployed_bandwidth(sites, fps, grid);
  const auto raster = sdk::ingest::parse_raster(cfg.dataset_dir + "/ntl.asc");
  const auto weights = sdk::demand::ntl_weight_series(raster, grid);
  const auto proxy = sdk::demand::weighted_proxy(bandwidth, weights);

  bandwidth.save_csv(run_path(cfg, "bandwidth.csv"));
  weights.save_csv(run_path(cfg, "ntl_weights.csv"));
  proxy.save_csv(run_path(cfg, "proxy.csv"));

  double total = 0.0;
  for (const auto& [cell, v] : proxy.values()) {
    total += v;
  }
  summary("proxy", {{"sites", std::to_string(sites.size())},
                    {"cells", std::to_string(proxy.populated_count())},
                    {"total", fmt(total)}});
}

void cmd_indicator(const RunConfig& cfg) {
  require_dataset(cfg);
  ensure_run_dir(cfg);
  const auto grid = load_run_grid(cfg);
  require_file(cfg.dataset_dir + "/sites.csv", "synth");
  require_file(cfg.dataset_dir + "/traffic.csv", "synth");

  const auto sites = sdk::ingest::parse_sites(cfg.dataset_dir + "/sites.csv");
  const auto traffic = sdk::ingest::parse_traffic(cfg.dataset_dir + "/traffic.csv");
  const auto fps = compute_footprints(cfg, sites, grid);

  std::optional<sdk::CellSeries> weights;
  if (cfg.demand.apply_user_weights) {
    require_file(cfg.dataset_dir + "/measurements.csv", "synth");
    const auto measurements =
        sdk::ingest::parse_measurements(cfg.dataset_dir + "/measurements.csv");
    weights = sdk::demand::user_weight_series(measurements, grid);
    weights->save_csv(run_path(cfg, "user_weights.csv"));
  }

  const auto indicator = sdk::demand::demand_indicator(
      traffic, fps, weights ? &*weights : nullptr, grid, cfg.demand.reduction);
  indicator.save_csv(run_path(cfg, "indicator.csv"));

  double total = 0.0;
  for (const auto& [cell, v] : indicator.values()) {
    total += v;
  }
  summary("indicator", {{"traffic_rows", std::to_string(traffic.size())},
                        {"cells", std::to_string(indicator.populated_count())},
                        {"total", fmt(total)}});
}

void cmd_validate_proxy(const RunConfig& cfg) {
  const auto grid = load_run_grid(cfg);
  require_file(run_path(cfg, "proxy.csv"), "proxy");
  require_file(run_path(cfg, "indicator.csv"), "indicator");
  const auto proxy = sdk::CellSeries::load_csv(run_path(cfg, "proxy.csv"), grid, "proxy", "mhz");
  const auto indicator =
      sdk::CellSeries::load_csv(run_path(cfg, "indicator.csv"), grid, "indicator", "mbps");

  const auto fit = sdk::demand::ols_validate(proxy, indicator);
  json j{{"slope", fit.slope},
         {"intercept", fit.intercept},
         {"r_squared", fit.r_squared},
         {"n", fit.n}};
  sdk::ingest::write_text_file(run_path(cfg, "validation.json"), j.dump(2) + "\n");
  summary("validate-proxy", {{"n", std::to_string(fit.n)},
                             {"slope", fmt(fit.slope)},
                             {"intercept", fmt(fit.intercept)},
                             {"r2", fmt(fit.r_squared)}});
}

void cmd_features(const RunConfig& cfg) {
  require_dataset(cfg);
  const auto grid = load_run_grid(cfg);
  require_file(run_path(cfg, "proxy.csv"), "proxy");
  const std::string manifest_path = cfg.dataset_dir + "/features/manifest.json";
  require_file(manifest_path, "synth");

  const json manifest = json::parse(sdk::ingest::read_text_file(manifest_path));
  const auto target = sdk::CellSeries::load_csv(run_path(cfg, "proxy.csv"), grid, "target", "mhz");

  const double cell_area_km2 =
      (grid.cell_size_m / 1000.0) * (grid.cell_size_m / 1000.0);
  std::vector<sdk::CellSeries> columns;
  std::size_t outside_points = 0;
  for (const auto& entry : manifest) {
    const std::string file = cfg.dataset_dir + "/features/" + entry.at("file").get<std::string>();
    const std::string name = entry.at("name").get<std::string>();
    const auto kind = sdk::ingest::source_kind_from_string(entry.at("kind").get<std::string>());
    const auto allocation =
        sdk::ingest::allocation_from_string(entry.value("allocation", "extensive"));
    const auto source = sdk::ingest::parse_feature_source(file, kind, name, allocation);

    sdk::CellSeries column;
    switch (kind) {
      case sdk::ingest::SourceKind::kPoint: {
        auto result = sdk::features::rasterize_points(source, grid);
        outside_points += result.outside_count;
        if (result.outside_count > 0) {
          log_warn(name + ": dropped " + std::to_string(result.outside_count) +
                   " point(s) outside the grid");
        }
        column = std::move(result.counts);
        break;
      }
      case sdk::ingest::SourceKind::kLine:
        column = sdk::features::rasterize_lines(source, grid);
        break;
      case sdk::ingest::SourceKind::kPolygonValue:
        column = sdk::features::rasterize_polygon_value(source, grid);
        break;
    }
    if (cfg.features.per_km2 && scales_per_area(entry)) {
      sdk::CellSeries scaled(grid, column.name(), column.units() + "_per_km2");
      for (const auto& [cell, v] : column.values()) {
        scaled.set(cell, v / cell_area_km2);
      }
      column = std::move(scaled);
    }
    columns.push_back(std::move(column));
  }

  const auto table = sdk::features::assemble(columns, target, cfg.features.mask);
  table.save_csv(run_path(cfg, "features.csv"));
  summary("features", {{"rows", std::to_string(table.n_rows())},
                       {"columns", std::to_string(table.n_features())},
                       {"outside_points", std::to_string(outside_points)}});
}

void cmd_rank(const RunConfig& cfg) {
  const auto grid = load_run_grid(cfg);
  require_file(run_path(cfg, "features.csv"), "features");
  const auto table = sdk::features::FeatureTable::load_csv(run_path(cfg, "features.csv"), grid);
  const auto report = sdk::features::rank_features(table, cfg.seed, cfg.rank.params);
  sdk::ingest::write_text_file(run_path(cfg, "importance.json"), report.to_json());

  const auto ranking = report.ranking();
  const std::size_t top_idx = static_cast<std::size_t>(
      std::find(report.feature_names.begin(), report.feature_names.end(), ranking.front()) -
      report.feature_names.begin());
  summary("rank", {{"features", std::to_string(report.feature_names.size())},
                   {"top_feature", ranking.front()},
                   {"top_score", fmt(report.aggregate[top_idx])}});
}

void cmd_split(const RunConfig& cfg) {
  const auto grid = load_run_grid(cfg);
  require_file(run_path(cfg, "features.csv"), "features");
  const auto table = sdk::features::FeatureTable::load_csv(run_path(cfg, "features.csv"), grid);
  const auto plan =
      sdk::pipeline::spatial_split(table, cfg.model.k_clusters, cfg.model.train_frac, cfg.seed);

  json train_cells = json::array();
  for (const std::size_t row : plan.train_rows) {
    train_cells.push_back({table.cell_ids[row].col, table.cell_ids[row].row});
  }
  json test_cells = json::array();
  for (const std::size_t row : plan.test_rows) {
    test_cells.push_back({table.cell_ids[row].col, table.cell_ids[row].row});
  }
  json j{{"k", plan.k},
         {"train_frac", plan.train_frac},
         {"seed", plan.seed},
         {"cluster_of", plan.cluster_of},
         {"train_rows", plan.train_rows},
         {"test_rows", plan.test_rows},
         {"train_cells", train_cells},
         {"test_cells", test_cells}};
  sdk::ingest::write_text_file(run_path(cfg, "split.json"), j.dump(2) + "\n");
  summary("split", {{"clusters", std::to_string(plan.k)},
                    {"train", std::to_string(plan.train_rows.size())},
                    {"test", std::to_string(plan.test_rows.size())}});
}

void cmd_train(const RunConfig& cfg) {
  const auto grid = load_run_grid(cfg);
  require_file(run_path(cfg, "features.csv"), "features");
  const auto table = sdk::features::FeatureTable::load_csv(run_path(cfg, "features.csv"), grid);
  const auto test_table = load_test_table(cfg, table);

  const std::string scenario_name =
      cfg.model.mode == sdk::pipeline::ScenarioMode::kCombined ? "combined" : "cross_region";
  const auto artifacts =
      sdk::pipeline::run_scenario(table, test_table, cfg.scenario_config(scenario_name), cfg.seed);

  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& artifact : artifacts) {
    const std::string kind = sdk::pipeline::to_string(artifact.kind);
    artifact.save(run_path(cfg, "artifact_" + kind + ".json"));
    kv.emplace_back(kind + "_r2", fmt(artifact.test_r2));
    kv.emplace_back(kind + "_rmse", fmt(artifact.test_rmse));
  }
  summary("train", kv);
}

void cmd_evaluate(const RunConfig& cfg) {
  const auto grid = load_run_grid(cfg);
  require_file(run_path(cfg, "features.csv"), "features");
  const auto files = artifact_files(cfg);
  if (files.empty()) {
    throw sdk::IoError("no artifacts in " + cfg.run_dir() + "; run `sdk train` first");
  }
  const auto table = sdk::features::FeatureTable::load_csv(run_path(cfg, "features.csv"), grid);

  std::string csv = "artifact,scenario,model,r2,rmse,cv_r2_mean,cv_r2_std,cv_rmse_mean,cv_rmse_std\n";
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& file : files) {
    const auto artifact = sdk::pipeline::ModelArtifact::load(run_path(cfg, file));
    const auto test_table =
        artifact.mode == sdk::pipeline::ScenarioMode::kCrossRegion ? load_test_table(cfg, table)
                                                                   : table;
    const auto metrics = sdk::pipeline::recompute_metrics(artifact, table, test_table);
    if (std::abs(metrics.r2 - artifact.test_r2) > 1e-9 ||
        std::abs(metrics.rmse - artifact.test_rmse) > 1e-9) {
      throw sdk::ValidationError({"artifact " + file + " metrics do not recompute: stored r2=" +
                                  fmt(artifact.test_r2) + " recomputed r2=" + fmt(metrics.r2)});
    }
    const std::string label =
        file.substr(std::string("artifact_").size(),
                    file.size() - std::string("artifact_").size() - std::string(".json").size());
    csv += label + ',' + artifact.scenario + ',' + sdk::pipeline::to_string(artifact.kind) + ',' +
           sdk::ingest::format_double(artifact.test_r2) + ',' +
           sdk::ingest::format_double(artifact.test_rmse) + ',' +
           sdk::ingest::format_double(artifact.cv.r2_mean) + ',' +
           sdk::ingest::format_double(artifact.cv.r2_std) + ',' +
           sdk::ingest::format_double(artifact.cv.rmse_mean) + ',' +
           sdk::ingest::format_double(artifact.cv.rmse_std) + '\n';
    kv.emplace_back(label + "_r2", fmt(artifact.test_r2));
    kv.emplace_back(label + "_rmse", fmt(artifact.test_rmse));
  }
  sdk::ingest::write_text_file(run_path(cfg, "metrics.csv"), csv);
  summary("evaluate", kv);
}

void cmd_reduce(const RunConfig& cfg, std::size_t top_n_override) {
  const auto grid = load_run_grid(cfg);
  require_file(run_path(cfg, "features.csv"), "features");
  const std::string kind = sdk::pipeline::to_string(cfg.reduce.model);
  require_file(run_path(cfg, "artifact_" + kind + ".json"), "train");

  const auto table = sdk::features::FeatureTable::load_csv(run_path(cfg, "features.csv"), grid);
  const auto artifact = sdk::pipeline::ModelArtifact::load(run_path(cfg, "artifact_" + kind + ".json"));
  const auto test_table =
      artifact.mode == sdk::pipeline::ScenarioMode::kCrossRegion ? load_test_table(cfg, table)
                                                                 : table;

  const std::size_t top_n = top_n_override > 0 ? top_n_override : cfg.reduce.top_n;
  const auto reduced = sdk::pipeline::run_reduced(artifact, table, test_table, top_n);
  reduced.save(run_path(cfg, "artifact_" + kind + "_top" + std::to_string(top_n) + ".json"));
  summary("reduce", {{"model", kind},
                     {"top_n", std::to_string(top_n)},
                     {"r2", fmt(reduced.test_r2)},
                     {"rmse", fmt(reduced.test_rmse)},
                     {"delta_r2", fmt(*reduced.delta_r2_vs_full)}});
}

void cmd_heatmap(const RunConfig& cfg, const std::string& series) {
  if (series.empty()) {
    throw sdk::ValidationError({"heatmap needs --series NAME (a <name>.csv in the run directory)"});
  }
  const auto grid = load_run_grid(cfg);
  const std::string source = run_path(cfg, series + ".csv");
  require_file(source, "the stage that produces " + series + ".csv");
  const auto values = sdk::CellSeries::load_csv(source, grid, series, "");

  json features_j = json::array();
  for (const auto& [cell, v] : values.values()) {
    const auto corners = sdk::geo::cell_polygon(cell, grid);
    json ring = json::array();
    for (const auto& p : corners) {
      ring.push_back({p.lon, p.lat});
    }
    ring.push_back({corners[0].lon, corners[0].lat});
    features_j.push_back({{"type", "Feature"},
                          {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}},
                          {"properties", {{"col", cell.col}, {"row", cell.row}, {"value", v}}}});
  }
  const json out{{"type", "FeatureCollection"}, {"name", series}, {"features", features_j}};
  const std::string path = run_path(cfg, "heatmap_" + series + ".geojson");
  sdk::ingest::write_text_file(path, out.dump(2) + "\n");
  summary("heatmap", {{"series", series},
                      {"cells", std::to_string(values.populated_count())},
                      {"file", path}});
}

}  // namespace sdkcli

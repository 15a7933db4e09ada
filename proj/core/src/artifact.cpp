#include <nlohmann/json.hpp>

#include "sdk/errors.hpp"
#include "sdk/ingest.hpp"
#include "sdk/pipeline.hpp"

namespace sdk::pipeline {

namespace {

using nlohmann::json;

json split_to_value(const SplitPlan& plan) {
  return json{{"k", plan.k},
              {"train_frac", plan.train_frac},
              {"seed", plan.seed},
              {"cluster_of", plan.cluster_of},
              {"train_rows", plan.train_rows},
              {"test_rows", plan.test_rows}};
}

SplitPlan split_from_value(const json& j) {
  SplitPlan plan;
  plan.k = j.at("k").get<std::size_t>();
  plan.train_frac = j.at("train_frac").get<double>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.cluster_of = j.at("cluster_of").get<std::vector<std::size_t>>();
  plan.train_rows = j.at("train_rows").get<std::vector<std::size_t>>();
  plan.test_rows = j.at("test_rows").get<std::vector<std::size_t>>();
  return plan;
}

json cv_to_value(const ml::CvResult& cv) {
  json folds = json::array();
  for (const auto& f : cv.folds) {
    folds.push_back({{"r2", f.r2}, {"rmse", f.rmse}});
  }
  return json{{"folds", folds},
              {"r2_mean", cv.r2_mean},
              {"r2_std", cv.r2_std},
              {"rmse_mean", cv.rmse_mean},
              {"rmse_std", cv.rmse_std}};
}

ml::CvResult cv_from_value(const json& j) {
  ml::CvResult cv;
  for (const auto& f : j.at("folds")) {
    cv.folds.push_back({f.at("r2").get<double>(), f.at("rmse").get<double>()});
  }
  cv.r2_mean = j.at("r2_mean").get<double>();
  cv.r2_std = j.at("r2_std").get<double>();
  cv.rmse_mean = j.at("rmse_mean").get<double>();
  cv.rmse_std = j.at("rmse_std").get<double>();
  return cv;
}

}  // namespace

std::string ModelArtifact::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["mode"] = to_string(mode);
  j["model_kind"] = to_string(kind);
  j["feature_names"] = feature_names;
  j["model"] = json::parse(model_json);
  j["metrics"] = {{"r2", test_r2}, {"rmse", test_rmse}};
  j["cv"] = cv_to_value(cv);
  j["importance"] = json::parse(importance.to_json());
  j["split"] = split ? split_to_value(*split) : json(nullptr);
  j["seed"] = seed;
  j["config"] = json::parse(config_json);
  j["fingerprints"] = {{"train", train_fingerprint}, {"test", test_fingerprint}};
  j["delta_r2_vs_full"] = delta_r2_vs_full ? json(*delta_r2_vs_full) : json(nullptr);
  return j.dump(2) + "\n";
}

ModelArtifact ModelArtifact::from_json(const std::string& text) {
  const json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ParseError("<artifact>", 1, 1, "invalid JSON");
  }
  ModelArtifact a;
  a.scenario = j.at("scenario").get<std::string>();
  a.mode = scenario_mode_from_string(j.at("mode").get<std::string>());
  a.kind = model_kind_from_string(j.at("model_kind").get<std::string>());
  a.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  a.model_json = j.at("model").dump();
  a.test_r2 = j.at("metrics").at("r2").get<double>();
  a.test_rmse = j.at("metrics").at("rmse").get<double>();
  a.cv = cv_from_value(j.at("cv"));
  a.importance = features::ImportanceReport::from_json(j.at("importance").dump());
  if (!j.at("split").is_null()) {
    a.split = split_from_value(j.at("split"));
  }
  a.seed = j.at("seed").get<std::uint64_t>();
  a.config_json = j.at("config").dump();
  a.train_fingerprint = j.at("fingerprints").at("train").get<std::string>();
  a.test_fingerprint = j.at("fingerprints").at("test").get<std::string>();
  if (j.contains("delta_r2_vs_full") && !j.at("delta_r2_vs_full").is_null()) {
    a.delta_r2_vs_full = j.at("delta_r2_vs_full").get<double>();
  }
  return a;
}

void ModelArtifact::save(const std::string& path) const {
  ingest::write_text_file(path, to_json());
}

ModelArtifact ModelArtifact::load(const std::string& path) {
  return from_json(ingest::read_text_file(path));
}

}  // namespace sdk::pipeline

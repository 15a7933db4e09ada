#include "sdk/ml/serialize.hpp"

#include <nlohmann/json.hpp>

#include "sdk/errors.hpp"

namespace sdk::ml {

namespace {

using nlohmann::json;

json parse_or_throw(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ParseError(what, 1, 1, "invalid JSON");
  }
  return j;
}

json tree_to_value(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"gain", n.gain},
                     {"left", n.left},
                     {"right", n.right},
                     {"leaf_value", n.leaf_value}});
  }
  return json{{"nodes", nodes}};
}

RegressionTree tree_from_value(const json& j) {
  RegressionTree tree;
  for (const auto& n : j.at("nodes")) {
    RegressionTree::Node node;
    node.feature = n.at("feature").get<std::int32_t>();
    node.threshold = n.at("threshold").get<double>();
    node.gain = n.at("gain").get<double>();
    node.left = n.at("left").get<std::int32_t>();
    node.right = n.at("right").get<std::int32_t>();
    node.leaf_value = n.at("leaf_value").get<double>();
    tree.nodes.push_back(node);
  }
  return tree;
}

}  // namespace

std::string linear_to_json(const LinearModel& model) {
  json j{{"kind", "linear"},
         {"coefficients", model.coefficients},
         {"intercept", model.intercept},
         {"feature_means", model.standardization.mean},
         {"feature_stds", model.standardization.std},
         {"converged", model.converged}};
  return j.dump();
}

LinearModel linear_from_json(const std::string& text) {
  const json j = parse_or_throw(text, "<linear model>");
  LinearModel model;
  model.coefficients = j.at("coefficients").get<std::vector<double>>();
  model.intercept = j.at("intercept").get<double>();
  model.standardization.mean = j.at("feature_means").get<std::vector<double>>();
  model.standardization.std = j.at("feature_stds").get<std::vector<double>>();
  model.converged = j.value("converged", true);
  return model;
}

std::string tree_to_json(const RegressionTree& tree) { return tree_to_value(tree).dump(); }

RegressionTree tree_from_json(const std::string& text) {
  return tree_from_value(parse_or_throw(text, "<tree model>"));
}

std::string gbr_to_json(const GbrModel& model) {
  json trees = json::array();
  for (const auto& tree : model.trees) {
    trees.push_back(tree_to_value(tree));
  }
  json j{{"kind", "gbr"},
         {"init", model.init},
         {"learning_rate", model.learning_rate},
         {"n_features", model.n_features},
         {"trees", trees}};
  return j.dump();
}

GbrModel gbr_from_json(const std::string& text) {
  const json j = parse_or_throw(text, "<gbr model>");
  GbrModel model;
  model.init = j.at("init").get<double>();
  model.learning_rate = j.at("learning_rate").get<double>();
  model.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& t : j.at("trees")) {
    model.trees.push_back(tree_from_value(t));
  }
  return model;
}

}  // namespace sdk::ml

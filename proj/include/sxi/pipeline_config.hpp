#ifndef SXI_PIPELINE_CONFIG_HPP
#define SXI_PIPELINE_CONFIG_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "sxi/calibration.hpp"
#include "sxi/data.hpp"
#include "sxi/gbt.hpp"
#include "sxi/insights.hpp"
#include "sxi/search.hpp"

namespace sxi {

using Json = nlohmann::json;

// Single JSON document, every field defaulted.
struct PipelineConfig {
  std::uint64_t seed = 0;
  double sparse_threshold = 0.40;
  SplitSpec split;  // 70/20/10 stratified; seed derived from master seed
  bool grouped_split = false;
  std::string group_column = "Patient_ID";

  double learner_lasso_lambda = 0.01;
  double remap_lambda = 0.01;
  int mi_bins = 10;
  GbtConfig learner_gbt;
  GbtConfig final_gbt;

  SearchSpace search;
  int cv_folds = 3;
  CalibrationConfig calibration;

  AdjustmentPolicy insights;
  int insights_target_class = 1;
  ForestConfig forest;

  int n_boot = 200;
  double ci_level = 0.95;
};

inline Json to_json(const GbtConfig& c) {
  return {{"n_trees", c.n_trees},
          {"depth", c.depth},
          {"learning_rate", c.learning_rate},
          {"min_leaf", c.min_leaf},
          {"l2", c.l2}};
}

inline GbtConfig gbt_config_from_json(const Json& j, const GbtConfig& dflt) {
  GbtConfig c = dflt;
  c.n_trees = j.value("n_trees", c.n_trees);
  c.depth = j.value("depth", c.depth);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.min_leaf = j.value("min_leaf", c.min_leaf);
  c.l2 = j.value("l2", c.l2);
  return c;
}

inline Json to_json(const SearchSpace& s) {
  std::vector<std::string> acts, opts;
  for (auto a : s.activations) acts.push_back(to_string(a));
  for (auto o : s.optimizers) opts.push_back(to_string(o));
  return {{"hidden_layer_counts", s.hidden_layer_counts},
          {"hidden_widths", s.hidden_widths},
          {"activations", acts},
          {"optimizers", opts},
          {"learning_rates", s.learning_rates},
          {"batch_sizes", s.batch_sizes},
          {"epochs", s.epochs},
          {"budget", s.budget},
          {"random_only", s.random_only}};
}

inline SearchSpace search_space_from_json(const Json& j) {
  SearchSpace s;
  s.hidden_layer_counts =
      j.value("hidden_layer_counts", s.hidden_layer_counts);
  s.hidden_widths = j.value("hidden_widths", s.hidden_widths);
  if (j.contains("activations")) {
    s.activations.clear();
    for (const auto& a : j.at("activations"))
      s.activations.push_back(activation_from_string(a.get<std::string>()));
  }
  if (j.contains("optimizers")) {
    s.optimizers.clear();
    for (const auto& o : j.at("optimizers"))
      s.optimizers.push_back(optimizer_from_string(o.get<std::string>()));
  }
  s.learning_rates = j.value("learning_rates", s.learning_rates);
  s.batch_sizes = j.value("batch_sizes", s.batch_sizes);
  s.epochs = j.value("epochs", s.epochs);
  s.budget = j.value("budget", s.budget);
  s.random_only = j.value("random_only", s.random_only);
  return s;
}

inline Json to_json(const CalibrationConfig& c) {
  return {{"positive_max", c.positive_max},
          {"grid_step", c.grid_step},
          {"extended_step", c.extended_step},
          {"max_outer_iterations", c.max_outer_iterations},
          {"max_regens", c.max_regens}};
}

inline CalibrationConfig calibration_from_json(const Json& j) {
  CalibrationConfig c;
  c.positive_max = j.value("positive_max", c.positive_max);
  c.grid_step = j.value("grid_step", c.grid_step);
  c.extended_step = j.value("extended_step", c.extended_step);
  c.max_outer_iterations =
      j.value("max_outer_iterations", c.max_outer_iterations);
  c.max_regens = j.value("max_regens", c.max_regens);
  return c;
}

inline Json to_json(const PipelineConfig& c) {
  return {{"seed", c.seed},
          {"sparse_threshold", c.sparse_threshold},
          {"split",
           {{"train", c.split.train_frac},
            {"test", c.split.test_frac},
            {"validation", c.split.val_frac},
            {"stratify", c.split.stratify},
            {"grouped", c.grouped_split},
            {"group_column", c.group_column}}},
          {"learner_lasso_lambda", c.learner_lasso_lambda},
          {"remap_lambda", c.remap_lambda},
          {"mi_bins", c.mi_bins},
          {"learner_gbt", to_json(c.learner_gbt)},
          {"final_gbt", to_json(c.final_gbt)},
          {"search", to_json(c.search)},
          {"cv_folds", c.cv_folds},
          {"calibration", to_json(c.calibration)},
          {"insights",
           {{"p_up", c.insights.p_up},
            {"p_down", c.insights.p_down},
            {"target_class", c.insights_target_class},
            {"trees", c.forest.n_trees},
            {"depth", c.forest.depth},
            {"min_leaf", c.forest.min_leaf}}},
          {"n_boot", c.n_boot},
          {"ci_level", c.ci_level}};
}

inline PipelineConfig pipeline_config_from_json(const Json& j) {
  PipelineConfig c;
  c.seed = j.value("seed", c.seed);
  c.sparse_threshold = j.value("sparse_threshold", c.sparse_threshold);
  if (j.contains("split")) {
    const Json& s = j.at("split");
    c.split.train_frac = s.value("train", c.split.train_frac);
    c.split.test_frac = s.value("test", c.split.test_frac);
    c.split.val_frac = s.value("validation", c.split.val_frac);
    c.split.stratify = s.value("stratify", c.split.stratify);
    c.grouped_split = s.value("grouped", c.grouped_split);
    c.group_column = s.value("group_column", c.group_column);
  }
  c.learner_lasso_lambda =
      j.value("learner_lasso_lambda", c.learner_lasso_lambda);
  c.remap_lambda = j.value("remap_lambda", c.remap_lambda);
  c.mi_bins = j.value("mi_bins", c.mi_bins);
  if (j.contains("learner_gbt"))
    c.learner_gbt = gbt_config_from_json(j.at("learner_gbt"), c.learner_gbt);
  if (j.contains("final_gbt"))
    c.final_gbt = gbt_config_from_json(j.at("final_gbt"), c.final_gbt);
  if (j.contains("search")) c.search = search_space_from_json(j.at("search"));
  c.cv_folds = j.value("cv_folds", c.cv_folds);
  if (j.contains("calibration"))
    c.calibration = calibration_from_json(j.at("calibration"));
  if (j.contains("insights")) {
    const Json& i = j.at("insights");
    c.insights.p_up = i.value("p_up", c.insights.p_up);
    c.insights.p_down = i.value("p_down", c.insights.p_down);
    c.insights_target_class =
        i.value("target_class", c.insights_target_class);
    c.forest.n_trees = i.value("trees", c.forest.n_trees);
    c.forest.depth = i.value("depth", c.forest.depth);
    c.forest.min_leaf = i.value("min_leaf", c.forest.min_leaf);
  }
  c.n_boot = j.value("n_boot", c.n_boot);
  c.ci_level = j.value("ci_level", c.ci_level);
  return c;
}

}  // namespace sxi

#endif  // SXI_PIPELINE_CONFIG_HPP

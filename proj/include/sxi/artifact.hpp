#ifndef SXI_ARTIFACT_HPP
#define SXI_ARTIFACT_HPP

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sxi/calibration.hpp"
#include "sxi/data.hpp"
#include "sxi/gbt.hpp"
#include "sxi/learners.hpp"
#include "sxi/network.hpp"
#include "sxi/scoring.hpp"
#include "sxi/search.hpp"

namespace sxi {

using Json = nlohmann::json;

constexpr int kArtifactSchemaVersion = 1;

// ---- JSON codecs ---------------------------------------------------------

inline Json to_json(const ImputationStats& s) {
  Json arr = Json::array();
  for (const auto& [name, value] : s.fills)
    arr.push_back({{"column", name}, {"fill", value}});
  return arr;
}

inline ImputationStats imputation_from_json(const Json& j) {
  ImputationStats s;
  for (const auto& e : j)
    s.fills.emplace_back(e.at("column").get<std::string>(),
                         e.at("fill").get<double>());
  return s;
}

inline Json to_json(const NormalizationMap& m) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < m.feature_names.size(); ++i)
    arr.push_back({{"feature", m.feature_names[i]},
                   {"min", m.entries[i].min},
                   {"max", m.entries[i].max},
                   {"direction", m.entries[i].direction == Direction::positive
                                     ? "positive"
                                     : "negative"}});
  return arr;
}

inline NormalizationMap normalization_from_json(const Json& j) {
  NormalizationMap m;
  for (const auto& e : j) {
    m.feature_names.push_back(e.at("feature").get<std::string>());
    NormalizationEntry entry;
    entry.min = e.at("min").get<double>();
    entry.max = e.at("max").get<double>();
    entry.direction = e.at("direction").get<std::string>() == "positive"
                          ? Direction::positive
                          : Direction::negative;
    m.entries.push_back(entry);
  }
  return m;
}

inline Json to_json(const AlgorithmWeights& a) {
  return {{"algorithm", to_string(a.algorithm)},
          {"features", a.feature_names},
          {"raw", a.raw},
          {"normalized", a.normalized},
          {"top5", a.top5}};
}

inline Json to_json(const FeatureWeightSet& s) {
  Json algos = Json::array();
  for (const auto& a : s.per_algorithm) algos.push_back(to_json(a));
  return {{"features", s.feature_names},
          {"per_algorithm", algos},
          {"composite", s.composite},
          {"retained", s.retained},
          {"importance_counts", s.importance_counts}};
}

inline FeatureWeightSet feature_weights_from_json(const Json& j) {
  FeatureWeightSet s;
  s.feature_names = j.at("features").get<std::vector<std::string>>();
  s.composite = j.at("composite").get<std::vector<double>>();
  s.retained = j.at("retained").get<std::vector<std::string>>();
  s.importance_counts = j.at("importance_counts").get<std::vector<int>>();
  for (const auto& e : j.at("per_algorithm")) {
    AlgorithmWeights a;
    for (LearnerKind k :
         {LearnerKind::lasso, LearnerKind::complement_nb, LearnerKind::gbt,
          LearnerKind::mutual_info, LearnerKind::pca})
      if (to_string(k) == e.at("algorithm").get<std::string>()) a.algorithm = k;
    a.feature_names = e.at("features").get<std::vector<std::string>>();
    a.raw = e.at("raw").get<std::vector<double>>();
    a.normalized = e.at("normalized").get<std::vector<double>>();
    a.top5 = e.at("top5").get<std::vector<int>>();
    s.per_algorithm.push_back(std::move(a));
  }
  return s;
}

inline Json to_json(const NetworkSpec& s) {
  std::vector<std::string> acts;
  for (Activation a : s.activations) acts.push_back(to_string(a));
  return {{"layer_sizes", s.layer_sizes},
          {"activations", acts},
          {"optimizer", to_string(s.optimizer)},
          {"learning_rate", s.learning_rate},
          {"batch_size", s.batch_size},
          {"epochs", s.epochs},
          {"seed", s.seed}};
}

inline NetworkSpec network_spec_from_json(const Json& j) {
  NetworkSpec s;
  s.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  for (const auto& a : j.at("activations"))
    s.activations.push_back(activation_from_string(a.get<std::string>()));
  s.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  s.learning_rate = j.at("learning_rate").get<double>();
  s.batch_size = j.at("batch_size").get<int>();
  s.epochs = j.at("epochs").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

inline Json to_json(const NetworkParams& p) {
  Json layers = Json::array();
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    std::vector<double> w(p.W[l].data(), p.W[l].data() + p.W[l].size());
    // Eigen stores column-major; record shapes so loads are unambiguous.
    std::vector<double> b(p.b[l].data(), p.b[l].data() + p.b[l].size());
    layers.push_back({{"rows", p.W[l].rows()},
                      {"cols", p.W[l].cols()},
                      {"weights_colmajor", w},
                      {"bias", b}});
  }
  return {{"layers", layers}, {"epoch_loss", p.epoch_loss}};
}

inline NetworkParams network_params_from_json(const Json& j) {
  NetworkParams p;
  for (const auto& e : j.at("layers")) {
    Eigen::Index rows = e.at("rows").get<Eigen::Index>();
    Eigen::Index cols = e.at("cols").get<Eigen::Index>();
    auto w = e.at("weights_colmajor").get<std::vector<double>>();
    auto b = e.at("bias").get<std::vector<double>>();
    Eigen::MatrixXd W(rows, cols);
    std::copy(w.begin(), w.end(), W.data());
    Eigen::VectorXd B(cols);
    std::copy(b.begin(), b.end(), B.data());
    p.W.push_back(std::move(W));
    p.b.push_back(std::move(B));
  }
  p.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
  return p;
}

inline Json to_json(const GbtModel& m) {
  Json trees = Json::array();
  for (const auto& t : m.trees) {
    Json nodes = Json::array();
    for (const auto& n : t.nodes)
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"value", n.value}});
    trees.push_back(std::move(nodes));
  }
  return {{"config",
           {{"n_trees", m.config.n_trees},
            {"depth", m.config.depth},
            {"learning_rate", m.config.learning_rate},
            {"min_leaf", m.config.min_leaf},
            {"l2", m.config.l2}}},
          {"base_margin", m.base_margin},
          {"trees", trees},
          {"gain", m.gain}};
}

inline GbtModel gbt_from_json(const Json& j) {
  GbtModel m;
  const Json& c = j.at("config");
  m.config.n_trees = c.at("n_trees").get<int>();
  m.config.depth = c.at("depth").get<int>();
  m.config.learning_rate = c.at("learning_rate").get<double>();
  m.config.min_leaf = c.at("min_leaf").get<int>();
  m.config.l2 = c.at("l2").get<double>();
  m.base_margin = j.at("base_margin").get<double>();
  m.gain = j.at("gain").get<std::vector<double>>();
  for (const auto& te : j.at("trees")) {
    GbtTree t;
    for (const auto& ne : te)
      t.nodes.push_back({ne.at("feature").get<int>(),
                         ne.at("threshold").get<double>(),
                         ne.at("left").get<int>(), ne.at("right").get<int>(),
                         ne.at("value").get<double>()});
    m.trees.push_back(std::move(t));
  }
  return m;
}

inline Json to_json(const CalibrationState& s) {
  Json hist = Json::array();
  for (const auto& step : s.history)
    hist.push_back({{"iteration", step.iteration},
                    {"target", step.target},
                    {"multiplier", step.multiplier},
                    {"accuracy", step.accuracy}});
  return {{"weights", s.current_weights},
          {"accuracy", s.current_accuracy},
          {"baseline_accuracy", s.baseline_accuracy},
          {"history", hist},
          {"regen_count", s.regen_count}};
}

// ---- Model artifact ------------------------------------------------------

// Everything needed to score a schema-conforming row, self-contained.
struct ModelArtifact {
  std::vector<std::string> feature_names;  // modeled features, in order
  std::string target_name;
  ImputationStats imputation;
  NormalizationMap normalization;
  FeatureWeightSet weights;
  std::vector<double> calibrated_weights;
  double alpha = 1.0;
  double benchmark = 0.0;
  int orientation = +1;
  NetworkSpec network_spec;
  NetworkParams network_params;
  GbtModel final_model;  // over [normalized features + alpha-scaled score]
  Json config_snapshot;
  std::uint64_t seed = 0;
};

inline Json to_json(const ModelArtifact& a) {
  return {{"schema_version", kArtifactSchemaVersion},
          {"feature_names", a.feature_names},
          {"target_name", a.target_name},
          {"imputation", to_json(a.imputation)},
          {"normalization", to_json(a.normalization)},
          {"weights", to_json(a.weights)},
          {"calibrated_weights", a.calibrated_weights},
          {"alpha", a.alpha},
          {"benchmark", a.benchmark},
          {"orientation", a.orientation},
          {"network_spec", to_json(a.network_spec)},
          {"network_params", to_json(a.network_params)},
          {"final_model", to_json(a.final_model)},
          {"config", a.config_snapshot},
          {"seed", a.seed}};
}

inline ModelArtifact artifact_from_json(const Json& j) {
  int version = j.at("schema_version").get<int>();
  if (version != kArtifactSchemaVersion)
    throw DataError("unsupported artifact schema version " +
                    std::to_string(version));
  ModelArtifact a;
  a.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  a.target_name = j.at("target_name").get<std::string>();
  a.imputation = imputation_from_json(j.at("imputation"));
  a.normalization = normalization_from_json(j.at("normalization"));
  a.weights = feature_weights_from_json(j.at("weights"));
  a.calibrated_weights =
      j.at("calibrated_weights").get<std::vector<double>>();
  a.alpha = j.at("alpha").get<double>();
  a.benchmark = j.at("benchmark").get<double>();
  a.orientation = j.at("orientation").get<int>();
  a.network_spec = network_spec_from_json(j.at("network_spec"));
  a.network_params = network_params_from_json(j.at("network_params"));
  a.final_model = gbt_from_json(j.at("final_model"));
  a.config_snapshot = j.at("config");
  a.seed = j.at("seed").get<std::uint64_t>();
  return a;
}

inline std::string serialize_artifact(const ModelArtifact& a) {
  Json payload = to_json(a);
  std::string body = payload.dump();
  Json doc = {{"checksum", fnv1a64(body)}, {"artifact", payload}};
  return doc.dump(2);
}

inline void save_artifact(const ModelArtifact& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write artifact: " + path);
  out << serialize_artifact(a) << "\n";
}

inline ModelArtifact parse_artifact(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataError(std::string("corrupted artifact document: ") + e.what());
  }
  std::string body = doc.at("artifact").dump();
  if (doc.at("checksum").get<std::uint64_t>() != fnv1a64(body))
    throw DataError("artifact checksum mismatch");
  return artifact_from_json(doc.at("artifact"));
}

inline ModelArtifact load_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read artifact: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_artifact(text);
}

}  // namespace sxi

#endif  // SXI_ARTIFACT_HPP

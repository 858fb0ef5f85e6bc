#ifndef SXI_PIPELINE_HPP
#define SXI_PIPELINE_HPP

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "sxi/artifact.hpp"
#include "sxi/calibration.hpp"
#include "sxi/data.hpp"
#include "sxi/insights.hpp"
#include "sxi/metrics.hpp"
#include "sxi/pipeline_config.hpp"
#include "sxi/scoring.hpp"
#include "sxi/search.hpp"

namespace sxi {

struct RowScore {
  double sxi_score = 0.0;
  int flag = 0;
  double probability = 0.0;
};

struct PipelineResult {
  ModelArtifact artifact;
  Json report;
};

namespace detail {

inline std::vector<std::vector<double>> feature_matrix(const DataTable& t) {
  auto idx = t.feature_indices();
  std::vector<std::vector<double>> X(t.n_rows(),
                                     std::vector<double>(idx.size()));
  for (std::size_t i = 0; i < t.n_rows(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      X[i][j] = t.columns[idx[j]].values[i];
  return X;
}

inline std::string stage(const std::string& name, const std::exception& e) {
  return "stage '" + name + "': " + e.what();
}

}  // namespace detail

// Scores rows through a frozen artifact: impute from stored stats,
// normalize, weighted-mean score, alpha-scale, flag against the stored
// benchmark, then the final classifier's probability.
inline std::vector<RowScore> score_rows(const ModelArtifact& artifact,
                                        const DataTable& rows) {
  std::vector<int> col_of(artifact.feature_names.size());
  for (std::size_t j = 0; j < artifact.feature_names.size(); ++j) {
    int c = rows.column_index(artifact.feature_names[j]);
    if (c < 0)
      throw DataError("missing required column: " + artifact.feature_names[j]);
    col_of[j] = c;
  }
  double wsum = 0.0;
  for (double w : artifact.calibrated_weights) wsum += w;
  if (wsum <= 0.0) throw InternalError("artifact has all-zero weights");

  std::size_t d = artifact.feature_names.size();
  std::vector<RowScore> out(rows.n_rows());
  std::vector<double> feats(d);
  for (std::size_t i = 0; i < rows.n_rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const Column& c = rows.columns[col_of[j]];
      double v;
      if (c.missing[i]) {
        auto fill = artifact.imputation.fill_for(artifact.feature_names[j]);
        if (!fill)
          throw DataError("no imputation statistic for column " + c.name);
        v = *fill;
      } else {
        v = c.values[i];
      }
      int m = artifact.normalization.index_of(artifact.feature_names[j]);
      feats[j] = normalize_value(v, artifact.normalization.entries[m]);
    }
    double score = 0.0;
    for (std::size_t j = 0; j < d; ++j)
      score += (artifact.calibrated_weights[j] / wsum) * feats[j];
    double scaled = artifact.alpha * score;
    RowScore rs;
    rs.sxi_score = score;
    rs.flag = artifact.orientation * (scaled - artifact.benchmark) >= 0.0 ? 1
                                                                          : 0;
    std::vector<double> final_row = feats;
    final_row.push_back(scaled);
    rs.probability = artifact.final_model.predict_prob(final_row);
    out[i] = rs;
  }
  return out;
}

// Metrics block (accuracy, PPV, recall, NPV, AUC) with percentile-bootstrap
// CIs, in the shape the experiment tables use.
inline Json evaluate_scores(const std::vector<RowScore>& scored,
                            const std::vector<int>& labels, int n_boot,
                            double level, std::uint64_t seed) {
  std::vector<double> probs(scored.size());
  std::vector<int> pred(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    probs[i] = scored[i].probability;
    pred[i] = probs[i] >= 0.5 ? 1 : 0;
  }
  ConfusionMatrix cm = confusion(pred, labels);
  ClassificationMetrics m = classification_metrics(cm);
  double auc = roc_auc(probs, labels).auc;

  auto with_ci = [&](const char* tag, std::optional<double> point,
                     const MetricFn& fn) -> Json {
    if (!point) return {{"value", nullptr}};
    auto [lo, hi] = bootstrap_ci(fn, probs, labels, n_boot, level,
                                 derive_seed(seed, tag));
    return {{"value", *point}, {"ci_low", lo}, {"ci_high", hi}};
  };
  auto metric_of = [](auto select) {
    return [select](const std::vector<double>& s, const std::vector<int>& y) {
      std::vector<int> p(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) p[i] = s[i] >= 0.5 ? 1 : 0;
      auto mm = classification_metrics(confusion(p, y));
      auto v = select(mm);
      if (!v) throw DataError("metric undefined");
      return *v;
    };
  };

  Json out;
  out["n_rows"] = labels.size();
  out["confusion"] = {{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp},
                      {"fn", cm.fn}};
  out["accuracy"] = with_ci(
      "accuracy", m.accuracy, metric_of([](const ClassificationMetrics& x) {
        return std::optional<double>(x.accuracy);
      }));
  out["precision_ppv"] = with_ci(
      "precision", m.precision, metric_of([](const ClassificationMetrics& x) {
        return x.precision;
      }));
  out["recall"] = with_ci(
      "recall", m.recall,
      metric_of([](const ClassificationMetrics& x) { return x.recall; }));
  out["npv"] = with_ci(
      "npv", m.npv,
      metric_of([](const ClassificationMetrics& x) { return x.npv; }));
  out["auc"] = with_ci("auc", auc,
                       [](const std::vector<double>& s,
                          const std::vector<int>& y) {
                         return roc_auc(s, y).auc;
                       });
  return out;
}

// The core training loop on pre-split data. `table` inputs must already be cleaned
// of sparse columns but may still contain missing cells.
inline PipelineResult train_pipeline_presplit(const DataTable& train_in,
                                              const DataTable& test_in,
                                              const DataTable& val_in,
                                              const PipelineConfig& config) {
  PipelineResult result;
  Json& report = result.report;
  ModelArtifact& artifact = result.artifact;

  try {
    // Imputation statistics come from the training split only.
    auto [train_tab, imp_stats] = impute(train_in);
    artifact.imputation = imp_stats;
    auto y_train = train_tab.labels();

    // Normalization, first pass.
    NormalizationMap map0 = fit_normalization(train_tab);
    DataTable norm0 = normalize(train_tab, map0);

    // Bivariate correlation weights and the base score.
    BivariateWeights bw = bivariate_weights(norm0);
    ScoreSet base = compute_scores(norm0, bw.weights, &y_train);
    report["base"] = {{"benchmark", base.benchmark},
                      {"orientation", base.orientation},
                      {"delineation_accuracy", *base.delineation_accuracy}};
    BenchmarkReport bench = benchmark_report(base, y_train);
    report["benchmark_analysis"] = {
        {"benchmark", bench.benchmark},
        {"positive_pct", bench.positive_pct},
        {"negative_pct", bench.negative_pct},
        {"above_positive", bench.above_positive},
        {"above_negative", bench.above_negative},
        {"below_positive", bench.below_positive},
        {"below_negative", bench.below_negative}};

    // Lasso-driven min/max remap, then re-normalize.
    RemapResult remap = lasso_remap(train_tab, norm0, base.flags, map0,
                                    config.remap_lambda);
    artifact.normalization = remap.map;
    report["remap"] = {{"no_flagged_rows", remap.no_flagged_rows},
                       {"coefficients", remap.coefficients}};
    DataTable norm = normalize(train_tab, remap.map);

    // Five learners and the composite weights.
    auto X = detail::feature_matrix(norm);
    auto names = norm.feature_names();
    std::vector<AlgorithmWeights> algos;
    algos.push_back(fit_lasso_weights(X, y_train, names,
                                      config.learner_lasso_lambda));
    algos.push_back(fit_complement_nb(X, y_train, names));
    algos.push_back(fit_gbt_weights(X, y_train, names, config.learner_gbt));
    algos.push_back(mutual_information(X, y_train, names, config.mi_bins));
    algos.push_back(fit_pca(X, names));
    FeatureWeightSet weights = composite_weights(std::move(algos));
    artifact.weights = weights;

    ScoreSet composite_scores = compute_scores(norm, weights.composite,
                                               &y_train);

    // Network over [features + current SXI score]; the score column enters
    // with the baseline importance of 1.
    std::vector<std::vector<double>> X_net = X;
    for (std::size_t i = 0; i < X_net.size(); ++i)
      X_net[i].push_back(composite_scores.scores[i]);
    std::vector<int> counts_net = weights.importance_counts;
    counts_net.push_back(1);

    SearchSpace space = config.search;
    space.seed = derive_seed(config.seed, "search");
    SearchResult search = hyperparameter_search(space, X_net, y_train,
                                                config.cv_folds, counts_net);
    NetworkSpec net_spec = search.best_spec;
    net_spec.seed = derive_seed(config.seed, "network");
    TrainResult net = train(net_spec, init_custom(net_spec, counts_net),
                            X_net, y_train);
    artifact.network_spec = net_spec;
    artifact.network_params = net.params;
    report["search"] = {{"best_cv_auc", search.best_cv_auc},
                        {"evaluations", search.evaluations.size()},
                        {"best_spec", to_json(net_spec)}};
    report["network"] = {{"best_epoch", net.best_epoch},
                         {"best_monitor_loss", net.best_monitor_loss},
                         {"epoch_loss", net.params.epoch_loss}};

    // Refined weights over the original features: drop the appended score
    // input and renormalize.
    std::vector<double> refined =
        extract_feature_weights(net.params);
    refined.pop_back();
    double rsum = 0.0;
    for (double v : refined) rsum += v;
    if (rsum > 0.0)
      for (double& v : refined) v /= rsum;
    else
      std::fill(refined.begin(), refined.end(), 1.0 / refined.size());

    // Iterative weight calibration.
    CalibrationState calib =
        calibrate(weights.composite, norm, y_train, refined,
                  weights.importance_counts, config.calibration);
    artifact.calibrated_weights = calib.current_weights;
    report["calibration"] = to_json(calib);

    // Alpha tuning against the fixed training benchmark, on validation.
    ScoreSet calibrated_scores = compute_scores(norm, calib.current_weights,
                                                &y_train);
    artifact.benchmark = calibrated_scores.benchmark;
    artifact.orientation = calibrated_scores.orientation;

    auto [val, val_stats] = impute(val_in);
    (void)val_stats;
    DataTable norm_val = normalize(val, remap.map);
    auto y_val = val.labels();
    AlphaTuneResult alpha = alpha_tune(calibrated_scores, norm_val,
                                       calib.current_weights, y_val);
    artifact.alpha = alpha.alpha;
    report["alpha"] = {{"alpha", alpha.alpha},
                       {"validation_accuracy", alpha.accuracy}};

    // Final classifier on [features + alpha-scaled calibrated score].
    std::vector<std::vector<double>> X_final = X;
    for (std::size_t i = 0; i < X_final.size(); ++i)
      X_final[i].push_back(artifact.alpha * calibrated_scores.scores[i]);
    artifact.final_model = fit_gbt(X_final, y_train, config.final_gbt);

    artifact.feature_names = names;
    artifact.target_name = train_tab.columns[train_tab.target_index()].name;
    artifact.seed = config.seed;
    artifact.config_snapshot = to_json(config);

    // Evaluation on test and validation splits (report only; the artifact
    // stays independent of held-out labels).
    auto [test, test_stats] = impute(test_in);
    (void)test_stats;
    report["evaluation"]["test"] = evaluate_scores(
        score_rows(artifact, test), test.labels(), config.n_boot,
        config.ci_level, derive_seed(config.seed, "eval_test"));
    report["evaluation"]["validation"] = evaluate_scores(
        score_rows(artifact, val), y_val, config.n_boot, config.ci_level,
        derive_seed(config.seed, "eval_val"));
  } catch (const DataError& e) {
    throw DataError(detail::stage("train_pipeline", e));
  } catch (const InternalError& e) {
    throw InternalError(detail::stage("train_pipeline", e));
  }
  return result;
}

// Full pipeline: clean -> split 70/20/10 -> presplit stages.
inline PipelineResult train_pipeline(const DataTable& table,
                                     const PipelineConfig& config) {
  table.validate();
  auto [clean, dropped] = drop_sparse_columns(table, config.sparse_threshold);
  SplitSpec spec = config.split;
  spec.seed = derive_seed(config.seed, "pipeline_split");
  SplitResult parts =
      config.grouped_split
          ? split_grouped(clean, spec, config.group_column)
          : split(clean, spec);
  PipelineResult result = train_pipeline_presplit(parts.train, parts.test,
                                                  parts.validation, config);
  result.report["dropped_columns"] = dropped;
  result.report["split_sizes"] = {{"train", parts.train.n_rows()},
                                  {"test", parts.test.n_rows()},
                                  {"validation", parts.validation.n_rows()}};
  return result;
}

// ---- Experiment protocol (the three-use-case table layout) ---------------

struct CaseDataset {
  std::string file;        // when set, loaded from CSV
  std::size_t n = 0;       // otherwise synthesized
  double positive_frac = 0.0;
};

struct CaseDescriptor {
  std::string name;
  CaseDataset train;
  std::vector<CaseDataset> unseen;
  std::size_t d = 10;
  double separation = 2.0;
  std::uint64_t seed = 0;
  Json automl_baseline;  // optional pass-through numbers
};

inline CaseDescriptor case_from_json(const Json& j) {
  CaseDescriptor c;
  c.name = j.at("name").get<std::string>();
  auto dataset = [](const Json& d) {
    CaseDataset out;
    if (d.contains("file")) {
      out.file = d.at("file").get<std::string>();
    } else {
      out.n = d.at("n").get<std::size_t>();
      out.positive_frac = d.at("positive_frac").get<double>();
    }
    return out;
  };
  c.train = dataset(j.at("train"));
  for (const auto& u : j.at("unseen")) c.unseen.push_back(dataset(u));
  c.d = j.value("d", std::size_t(10));
  c.separation = j.value("separation", 2.0);
  c.seed = j.value("seed", std::uint64_t(0));
  if (j.contains("automl_baseline")) c.automl_baseline = j.at("automl_baseline");
  return c;
}

inline void validate_case(const CaseDescriptor& c) {
  auto check = [&](const CaseDataset& d, const std::string& what) {
    if (!d.file.empty()) return;
    if (d.n < 10) throw DataError(c.name + ": " + what + " too small");
    if (d.positive_frac <= 0.0 || d.positive_frac >= 1.0)
      throw DataError(c.name + ": " + what +
                      " positive fraction must be in (0,1)");
  };
  check(c.train, "train set");
  if (c.unseen.empty()) throw DataError(c.name + ": no unseen datasets");
  for (const auto& u : c.unseen) check(u, "unseen set");
}

inline DataTable materialize_case_dataset(const CaseDataset& d,
                                          const CaseDescriptor& c,
                                          std::uint64_t salt) {
  if (!d.file.empty()) return load_csv(d.file);
  return synth_generate(d.n, c.d, d.positive_frac, c.separation,
                        derive_seed(c.seed, "case_data", salt));
}

struct ExperimentResult {
  Json report;
  std::string text;
};

namespace detail {

inline std::string fmt_metric(const Json& m, bool percent) {
  if (m.at("value").is_null()) return "n/a";
  double scale = percent ? 100.0 : 1.0;
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << scale * m.at("value").get<double>()
     << " (" << scale * m.at("ci_low").get<double>() << " - "
     << scale * m.at("ci_high").get<double>() << ")";
  return os.str();
}

inline void render_case_table(std::ostringstream& os, const std::string& name,
                              const std::vector<std::string>& col_names,
                              const std::vector<Json>& cols,
                              const Json& automl) {
  os << "CASE " << name << "\n";
  os << std::left << std::setw(18) << "Metric";
  if (!automl.is_null()) os << std::setw(12) << "AutoML";
  for (const auto& cn : col_names) os << std::setw(28) << (cn + " (95% CI)");
  os << "\n";
  const char* metrics[] = {"accuracy", "precision_ppv", "recall", "npv",
                           "auc"};
  const char* labels[] = {"Accuracy", "Precision (PPV)", "Recall", "NPV",
                          "AUC"};
  for (int r = 0; r < 5; ++r) {
    bool percent = std::string(metrics[r]) != "auc";
    os << std::setw(18) << labels[r];
    if (!automl.is_null()) {
      if (automl.contains(metrics[r]))
        os << std::setw(12) << automl.at(metrics[r]).dump();
      else
        os << std::setw(12) << "-";
    }
    for (const auto& col : cols)
      os << std::setw(28) << fmt_metric(col.at(metrics[r]), percent);
    os << "\n";
  }
  os << "\n";
}

}  // namespace detail

// Runs each use case: build datasets, train once, evaluate on the held-out
// test split and on every unseen set, and emit the comparison tables.
inline ExperimentResult run_experiment(const std::vector<CaseDescriptor>& cases,
                                       const PipelineConfig& base_config) {
  for (const auto& c : cases) validate_case(c);  // fail before any training

  ExperimentResult result;
  result.report["cases"] = Json::array();
  std::ostringstream text;
  for (const auto& c : cases) {
    PipelineConfig config = base_config;
    config.seed = derive_seed(base_config.seed, "case", fnv1a64(c.name));
    DataTable train_table = materialize_case_dataset(c.train, c, 0);
    PipelineResult trained = train_pipeline(train_table, config);

    Json case_report;
    case_report["name"] = c.name;
    case_report["train_rows"] = train_table.n_rows();
    case_report["evaluation"]["sxi_test"] =
        trained.report["evaluation"]["test"];
    std::vector<std::string> col_names = {"SXI++"};
    std::vector<Json> cols = {trained.report["evaluation"]["test"]};
    for (std::size_t u = 0; u < c.unseen.size(); ++u) {
      DataTable unseen = materialize_case_dataset(c.unseen[u], c, u + 1);
      auto [imputed, stats] = impute(unseen);
      (void)stats;
      Json eval = evaluate_scores(
          score_rows(trained.artifact, imputed), imputed.labels(),
          config.n_boot, config.ci_level,
          derive_seed(config.seed, "eval_unseen", u));
      std::string label = "LNM-" + std::to_string(u + 1);
      case_report["evaluation"][label] = eval;
      col_names.push_back(label + " (unseen data " + std::to_string(u + 1) +
                          ")");
      cols.push_back(eval);
    }
    if (!c.automl_baseline.is_null())
      case_report["automl_baseline"] = c.automl_baseline;
    result.report["cases"].push_back(case_report);
    detail::render_case_table(text, c.name, col_names, cols,
                              c.automl_baseline);
  }
  result.text = text.str();
  return result;
}

}  // namespace sxi

#endif  // SXI_PIPELINE_HPP

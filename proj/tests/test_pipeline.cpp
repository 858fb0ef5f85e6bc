#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "sxi/sxi.hpp"

using namespace sxi;
using Catch::Approx;

namespace {

// A desk-speed configuration: single-point search space and small models.
PipelineConfig fast_config() {
  PipelineConfig c;
  c.seed = 11;
  c.search.hidden_layer_counts = {1};
  c.search.hidden_widths = {8};
  c.search.activations = {Activation::tanh};
  c.search.optimizers = {Optimizer::sgd};
  c.search.learning_rates = {0.1};
  c.search.batch_sizes = {32};
  c.search.epochs = {15};
  c.search.budget = 2;
  c.cv_folds = 2;
  c.learner_gbt.n_trees = 15;
  c.final_gbt.n_trees = 20;
  c.n_boot = 100;
  return c;
}

}  // namespace

TEST_CASE("train_pipeline is byte-deterministic per seed") {
  DataTable t = synth_generate(300, 4, 0.3, 1.5, 21);
  PipelineConfig cfg = fast_config();
  PipelineResult a = train_pipeline(t, cfg);
  PipelineResult b = train_pipeline(t, cfg);
  CHECK(serialize_artifact(a.artifact) == serialize_artifact(b.artifact));
  CHECK(a.report.dump() == b.report.dump());

  cfg.seed = 12;
  PipelineResult c = train_pipeline(t, cfg);
  CHECK(serialize_artifact(a.artifact) != serialize_artifact(c.artifact));
}

TEST_CASE("report carries every stage block and split sizes") {
  DataTable t = synth_generate(300, 4, 0.3, 1.5, 33);
  PipelineResult res = train_pipeline(t, fast_config());
  for (const char* key : {"base", "benchmark_analysis", "remap", "search",
                          "network", "calibration", "alpha", "evaluation",
                          "dropped_columns", "split_sizes"})
    REQUIRE(res.report.contains(key));
  CHECK(res.report["split_sizes"]["train"] == 210);
  CHECK(res.report["split_sizes"]["test"] == 60);
  CHECK(res.report["split_sizes"]["validation"] == 30);
  for (const char* split : {"test", "validation"}) {
    const Json& e = res.report["evaluation"][split];
    for (const char* m :
         {"accuracy", "precision_ppv", "recall", "npv", "auc"}) {
      REQUIRE(e.contains(m));
      if (!e[m]["value"].is_null()) {
        REQUIRE(e[m].contains("ci_low"));
        REQUIRE(e[m].contains("ci_high"));
        REQUIRE(e[m]["ci_low"].get<double>() <=
                e[m]["ci_high"].get<double>());
      }
    }
  }
  // The artifact itself holds no evaluation results.
  Json art = to_json(res.artifact);
  CHECK_FALSE(art.contains("evaluation"));
  // Calibration never went below its baseline.
  CHECK(res.report["calibration"]["accuracy"].get<double>() >=
        res.report["calibration"]["baseline_accuracy"].get<double>());
}

TEST_CASE("score_rows reproduces training-time scores exactly") {
  DataTable t = synth_generate(280, 4, 0.35, 1.5, 5);
  SplitSpec split_spec;
  split_spec.seed = 3;
  SplitResult parts = split(t, split_spec);
  PipelineResult res = train_pipeline_presplit(parts.train, parts.test,
                                               parts.validation, fast_config());

  auto [train_imputed, stats] = impute(parts.train);
  (void)stats;
  DataTable norm = normalize(train_imputed, res.artifact.normalization);
  ScoreSet expected = compute_scores(norm, res.artifact.calibrated_weights);
  auto scored = score_rows(res.artifact, parts.train);
  REQUIRE(scored.size() == expected.scores.size());
  for (std::size_t i = 0; i < scored.size(); ++i)
    REQUIRE(scored[i].sxi_score == expected.scores[i]);  // bit-exact
}

TEST_CASE("leakage audit: corrupting test labels leaves the artifact bytes") {
  DataTable t = synth_generate(280, 4, 0.3, 1.5, 17);
  SplitSpec split_spec;
  split_spec.seed = 9;
  SplitResult parts = split(t, split_spec);
  PipelineConfig cfg = fast_config();

  PipelineResult clean = train_pipeline_presplit(parts.train, parts.test,
                                                 parts.validation, cfg);
  DataTable corrupted_test = parts.test;
  int ti = corrupted_test.target_index();
  for (double& v : corrupted_test.columns[ti].values) v = 1.0 - v;
  PipelineResult dirty = train_pipeline_presplit(parts.train, corrupted_test,
                                                 parts.validation, cfg);
  CHECK(serialize_artifact(clean.artifact) ==
        serialize_artifact(dirty.artifact));
  // The test evaluation block must of course differ.
  CHECK(clean.report["evaluation"]["test"].dump() !=
        dirty.report["evaluation"]["test"].dump());
}

TEST_CASE("artifact save/load round trip scores identically") {
  DataTable t = synth_generate(300, 4, 0.3, 1.5, 41);
  PipelineResult res = train_pipeline(t, fast_config());
  std::string path = "test_pipeline_artifact.json";
  save_artifact(res.artifact, path);
  ModelArtifact loaded = load_artifact(path);

  DataTable fresh = synth_generate(100, 4, 0.3, 1.5, 999);
  auto a = score_rows(res.artifact, fresh);
  auto b = score_rows(loaded, fresh);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].sxi_score == b[i].sxi_score);
    REQUIRE(a[i].flag == b[i].flag);
    REQUIRE(a[i].probability == b[i].probability);
  }
  std::remove(path.c_str());
}

TEST_CASE("tampered checksum and unknown schema version are rejected") {
  DataTable t = synth_generate(260, 3, 0.3, 1.5, 2);
  PipelineResult res = train_pipeline(t, fast_config());
  std::string text = serialize_artifact(res.artifact);

  Json doc = Json::parse(text);
  doc["checksum"] = doc["checksum"].get<std::uint64_t>() + 1;
  CHECK_THROWS_WITH(parse_artifact(doc.dump()),
                    Catch::Matchers::ContainsSubstring("checksum mismatch"));

  Json doc2 = Json::parse(text);
  doc2["artifact"]["schema_version"] = 99;
  std::string body = doc2["artifact"].dump();
  doc2["checksum"] = fnv1a64(body);
  CHECK_THROWS_WITH(parse_artifact(doc2.dump()),
                    Catch::Matchers::ContainsSubstring("unsupported artifact"));

  CHECK_THROWS_AS(parse_artifact("not json at all"), DataError);
}

TEST_CASE("score_rows imputes missing cells from stored statistics") {
  DataTable t = synth_generate(260, 3, 0.3, 1.5, 7);
  PipelineResult res = train_pipeline(t, fast_config());

  DataTable rows = synth_generate(5, 3, 0.4, 1.5, 100);
  auto baseline = score_rows(res.artifact, rows);

  DataTable holed = rows;
  const std::string& f0 = res.artifact.feature_names[0];
  int c0 = holed.column_index(f0);
  holed.columns[c0].missing[2] = 1;
  auto scored = score_rows(res.artifact, holed);
  // Scoring with the missing cell equals scoring with the stored fill value.
  DataTable filled = rows;
  filled.columns[c0].values[2] = *res.artifact.imputation.fill_for(f0);
  auto expect = score_rows(res.artifact, filled);
  CHECK(scored[2].sxi_score == expect[2].sxi_score);
  CHECK(scored[2].probability == expect[2].probability);
  // Other rows untouched.
  CHECK(scored[0].sxi_score == baseline[0].sxi_score);
}

TEST_CASE("score_rows handles out-of-range values and missing columns") {
  DataTable t = synth_generate(260, 3, 0.3, 1.5, 13);
  PipelineResult res = train_pipeline(t, fast_config());

  DataTable rows = synth_generate(3, 3, 0.4, 1.5, 50);
  for (int j : rows.feature_indices())
    for (double& v : rows.columns[j].values) v *= 1e6;
  auto scored = score_rows(res.artifact, rows);
  for (const auto& s : scored) {
    REQUIRE(std::isfinite(s.sxi_score));
    REQUIRE(s.sxi_score >= 0.0);
    REQUIRE(s.sxi_score <= 1.0);
    REQUIRE(std::isfinite(s.probability));
  }

  DataTable missing_col = rows;
  missing_col.columns.erase(missing_col.columns.begin());
  CHECK_THROWS_WITH(score_rows(res.artifact, missing_col),
                    Catch::Matchers::ContainsSubstring("missing required"));
}

TEST_CASE("stage errors carry the stage name") {
  // Single-class data fails inside the pipeline with the stage attached.
  DataTable t = synth_generate(200, 3, 0.3, 1.0, 1);
  int ti = t.target_index();
  for (double& v : t.columns[ti].values) v = 0.0;
  SplitSpec s;
  CHECK_THROWS_AS(train_pipeline(t, fast_config()), DataError);
}

TEST_CASE("pipeline config JSON round trip preserves fields and defaults") {
  PipelineConfig c = fast_config();
  c.sparse_threshold = 0.25;
  c.remap_lambda = 0.005;
  PipelineConfig r = pipeline_config_from_json(to_json(c));
  CHECK(r.seed == c.seed);
  CHECK(r.sparse_threshold == 0.25);
  CHECK(r.remap_lambda == 0.005);
  CHECK(r.cv_folds == c.cv_folds);
  CHECK(r.search.budget == c.search.budget);
  CHECK(r.search.hidden_widths == c.search.hidden_widths);
  CHECK(r.final_gbt.n_trees == c.final_gbt.n_trees);

  // Empty document: all defaults.
  PipelineConfig d = pipeline_config_from_json(Json::object());
  CHECK(d.sparse_threshold == 0.40);
  CHECK(d.split.train_frac == 0.7);
  CHECK(d.search.budget == 15);
  CHECK(d.n_boot == 200);
}

TEST_CASE("case descriptors validate before any training") {
  CaseDescriptor bad;
  bad.name = "degenerate";
  bad.train.n = 1000;
  bad.train.positive_frac = 0.0;  // zero positives
  bad.unseen.push_back({"", 500, 0.02});
  CHECK_THROWS_AS(run_experiment({bad}, fast_config()), DataError);

  CaseDescriptor no_unseen;
  no_unseen.name = "empty";
  no_unseen.train = {"", 1000, 0.3};
  CHECK_THROWS_AS(validate_case(no_unseen), DataError);
}

TEST_CASE("case_from_json parses datasets, defaults, and baselines") {
  Json j = {{"name", "case-x"},
            {"train", {{"n", 2000}, {"positive_frac", 0.306}}},
            {"unseen", Json::array({{{"n", 500}, {"positive_frac", 0.02}},
                                    {{"file", "some.csv"}}})},
            {"seed", 4},
            {"automl_baseline", {{"accuracy", 99.9}}}};
  CaseDescriptor c = case_from_json(j);
  CHECK(c.name == "case-x");
  CHECK(c.train.n == 2000);
  CHECK(c.train.positive_frac == 0.306);
  REQUIRE(c.unseen.size() == 2);
  CHECK(c.unseen[1].file == "some.csv");
  CHECK(c.d == 10);
  CHECK(c.seed == 4);
  CHECK(c.automl_baseline["accuracy"] == 99.9);
}

TEST_CASE("run_experiment emits the table layout with CIs") {
  CaseDescriptor c;
  c.name = "toy";
  c.train = {"", 400, 0.3};
  c.unseen = {{"", 150, 0.2}, {"", 150, 0.2}};
  c.d = 4;
  c.separation = 2.0;
  c.seed = 8;
  ExperimentResult res = run_experiment({c}, fast_config());

  REQUIRE(res.report["cases"].size() == 1);
  const Json& cr = res.report["cases"][0];
  CHECK(cr["name"] == "toy");
  for (const char* col : {"sxi_test", "LNM-1", "LNM-2"}) {
    REQUIRE(cr["evaluation"].contains(col));
    const Json& auc = cr["evaluation"][col]["auc"];
    REQUIRE(auc.contains("value"));
    REQUIRE(auc.contains("ci_low"));
    REQUIRE(auc.contains("ci_high"));
  }
  CHECK(res.text.find("CASE toy") != std::string::npos);
  CHECK(res.text.find("LNM-1 (unseen data 1)") != std::string::npos);
  CHECK(res.text.find("Precision (PPV)") != std::string::npos);
  CHECK(res.text.find("NPV") != std::string::npos);
  CHECK(res.text.find("AUC") != std::string::npos);
}

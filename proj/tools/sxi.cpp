// sxi: command-line front end for the SXI++ LNM scoring pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "sxi/sxi.hpp"

namespace {

sxi::Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sxi::DataError("cannot open file: " + path);
  try {
    return sxi::Json::parse(in);
  } catch (const sxi::Json::exception& e) {
    throw sxi::DataError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw sxi::DataError("cannot write file: " + path);
  out << text;
}

sxi::PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return sxi::pipeline_config_from_json(read_json_file(path));
}

int run(int argc, char** argv) {
  CLI::App app{"SXI++ LNM scoring pipeline"};
  app.require_subcommand(1);

  std::string in_path, out_path, model_path, config_path, report_path,
      data_path, target_name = "SepsisLabel";
  double threshold = 0.40;

  auto* prepare = app.add_subcommand(
      "prepare", "Drop sparse columns and impute missing values");
  prepare->add_option("--in", in_path, "Input CSV")->required();
  prepare->add_option("--out", out_path, "Cleaned CSV")->required();
  prepare->add_option("--threshold", threshold,
                      "Missing-fraction drop threshold");
  prepare->add_option("--target", target_name, "Target column name");

  std::size_t synth_n = 2000, synth_d = 10;
  double synth_pos = 0.3, synth_sep = 2.0;
  std::uint64_t seed = 0;
  auto* synth =
      app.add_subcommand("synth", "Generate a synthetic two-class dataset");
  synth->add_option("--n", synth_n, "Rows");
  synth->add_option("--d", synth_d, "Features");
  synth->add_option("--pos-frac", synth_pos, "Positive fraction");
  synth->add_option("--sep", synth_sep, "Class separation (pooled sd units)");
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--out", out_path, "Output CSV")->required();

  auto* train = app.add_subcommand("train", "Train the full pipeline");
  train->add_option("--data", data_path, "Cleaned training CSV")->required();
  train->add_option("--config", config_path, "Pipeline config JSON");
  train->add_option("--out", model_path, "Model artifact path")->required();
  train->add_option("--report", report_path, "Training report JSON");
  train->add_option("--target", target_name, "Target column name");

  auto* score = app.add_subcommand("score", "Score rows with a trained model");
  score->add_option("--model", model_path, "Model artifact")->required();
  score->add_option("--in", in_path, "Rows CSV")->required();
  score->add_option("--out", out_path, "Scores CSV")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a model on labeled rows");
  eval->add_option("--model", model_path, "Model artifact")->required();
  eval->add_option("--in", in_path, "Labeled CSV")->required();
  eval->add_option("--target", target_name, "Target column name");

  double p_up = 0.10, p_down = 0.10;
  int target_class = 1, n_trees = 25;
  auto* insights =
      app.add_subcommand("insights", "Actionable-insights decision paths");
  insights->add_option("--model", model_path, "Model artifact")->required();
  insights->add_option("--data", data_path, "Cleaned labeled CSV")->required();
  insights->add_option("--p-up", p_up, "Increase for risk-elevating features");
  insights->add_option("--p-down", p_down,
                       "Decrease for risk-lowering features");
  insights->add_option("--target-class", target_class, "Path target class");
  insights->add_option("--trees", n_trees, "Forest size");
  insights->add_option("--seed", seed, "Forest seed");
  insights->add_option("--out", out_path, "Report basename (.txt/.json)");
  insights->add_option("--target", target_name, "Target column name");

  auto* experiment =
      app.add_subcommand("experiment", "Run the use-case comparison protocol");
  experiment->add_option("--config", config_path, "Cases JSON")->required();
  experiment->add_option("--report", report_path, "Report JSON output");

  app.require_subcommand(1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  sxi::SchemaHints hints;
  hints.target_name = target_name;

  if (prepare->parsed()) {
    sxi::DataTable table = sxi::load_csv(in_path, hints);
    auto [clean, dropped] = sxi::drop_sparse_columns(table, threshold);
    auto [imputed, stats] = sxi::impute(clean);
    (void)stats;
    sxi::save_csv(imputed, out_path);
    std::cout << "retained " << imputed.n_cols() << " columns, dropped "
              << dropped.size() << ":";
    for (const auto& d : dropped) std::cout << " " << d;
    std::cout << "\n";
  } else if (synth->parsed()) {
    sxi::save_csv(
        sxi::synth_generate(synth_n, synth_d, synth_pos, synth_sep, seed),
        out_path);
  } else if (train->parsed()) {
    sxi::PipelineConfig config = load_config(config_path);
    sxi::DataTable table = sxi::load_csv(data_path, hints);
    sxi::PipelineResult result = sxi::train_pipeline(table, config);
    sxi::save_artifact(result.artifact, model_path);
    if (!report_path.empty())
      write_text_file(report_path, result.report.dump(2) + "\n");
    std::cout << "model written to " << model_path << "\n";
    const auto& test = result.report["evaluation"]["test"];
    std::cout << "test accuracy " << test["accuracy"]["value"] << ", AUC "
              << test["auc"]["value"] << "\n";
  } else if (score->parsed()) {
    sxi::ModelArtifact artifact = sxi::load_artifact(model_path);
    hints.target_name = artifact.target_name;
    hints.require_target = false;
    sxi::DataTable rows = sxi::load_csv(in_path, hints);
    auto scored = sxi::score_rows(artifact, rows);
    std::ofstream out(out_path);
    if (!out) throw sxi::DataError("cannot write file: " + out_path);
    out << "row_id,sxi_score,flag,probability\n";
    out.precision(17);
    for (std::size_t i = 0; i < scored.size(); ++i)
      out << i << "," << scored[i].sxi_score << "," << scored[i].flag << ","
          << scored[i].probability << "\n";
  } else if (eval->parsed()) {
    sxi::ModelArtifact artifact = sxi::load_artifact(model_path);
    hints.target_name = artifact.target_name;
    sxi::DataTable rows = sxi::load_csv(in_path, hints);
    auto [imputed, stats] = sxi::impute(rows);
    (void)stats;
    sxi::Json metrics = sxi::evaluate_scores(
        sxi::score_rows(artifact, imputed), imputed.labels(), 200, 0.95, 0);
    std::cout << metrics.dump(2) << "\n";
  } else if (insights->parsed()) {
    sxi::ModelArtifact artifact = sxi::load_artifact(model_path);
    hints.target_name = artifact.target_name;
    sxi::DataTable table = sxi::load_csv(data_path, hints);
    auto [imputed, stats] = sxi::impute(table);
    (void)stats;

    // Feature signs come from the lasso learner's signed coefficients.
    std::vector<double> signs;
    for (const auto& aw : artifact.weights.per_algorithm)
      if (aw.algorithm == sxi::LearnerKind::lasso) signs = aw.raw;
    if (signs.empty())
      throw sxi::DataError("artifact carries no lasso coefficients");

    sxi::AdjustmentPolicy policy;
    policy.p_up = p_up;
    policy.p_down = p_down;
    policy.correlation_sign = artifact.orientation;
    sxi::DataTable adjusted = sxi::adjust_features(imputed, signs, policy);

    sxi::ForestConfig fc;
    fc.n_trees = n_trees;
    fc.seed = seed;
    sxi::RandomForest forest = sxi::fit_random_forest(adjusted, fc);
    sxi::RulePath path =
        sxi::extract_target_path(forest, adjusted, target_class);

    auto scored = sxi::score_rows(artifact, imputed);
    sxi::ScoreSet context;
    for (const auto& s : scored) context.scores.push_back(s.sxi_score);
    context.benchmark = artifact.benchmark;
    context.orientation = artifact.orientation;
    sxi::Recommendations rec =
        sxi::render_recommendations(path, policy, context);

    std::string base = out_path.empty() ? "report" : out_path;
    write_text_file(base + ".txt", rec.text);
    write_text_file(base + ".json", rec.json.dump(2) + "\n");
    std::cout << rec.text;
  } else if (experiment->parsed()) {
    sxi::Json doc = read_json_file(config_path);
    sxi::PipelineConfig config =
        doc.contains("pipeline")
            ? sxi::pipeline_config_from_json(doc.at("pipeline"))
            : sxi::PipelineConfig{};
    std::vector<sxi::CaseDescriptor> cases;
    for (const auto& c : doc.at("cases"))
      cases.push_back(sxi::case_from_json(c));
    sxi::ExperimentResult result = sxi::run_experiment(cases, config);
    std::cout << result.text;
    if (!report_path.empty())
      write_text_file(report_path, result.report.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sxi::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

#include "sepsis/cli.h"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "sepsis/config_io.h"
#include "sepsis/harness.h"
#include "sepsis/model_io.h"
#include "sepsis/report_io.h"
#include "sepsis/synthetic.h"

namespace sepsis::cli {

namespace fs = std::filesystem;

namespace {

ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : load_config(path);
}

int cmd_train(const std::string& data, const std::string& config_path, const std::string& out_dir,
              std::ostream& out) {
  const auto config = config_or_default(config_path);
  const auto cohort = load_cohort(data);
  const auto pipeline = run_cv(cohort, config);
  write_bundle(pipeline, out_dir);
  out << "trained " << pipeline.model.trees.size() << " trees on " << cohort.size()
      << " patients (minority fraction " << pipeline.report.selected_fraction << ", threshold "
      << pipeline.report.selected_threshold << ")\n";
  out << metrics_text(pipeline.report.train_metrics);
  return kOk;
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::string& out_dir,
                std::ostream& out) {
  const auto model = load_model(model_path);
  const auto cohort = load_cohort(data, model.preprocessing.catalog);
  // Score everything before touching the output directory.
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& p : cohort.patients) {
    PatientPrediction pred;
    pred.probabilities = predict_patient(model, p);
    pred.labels = threshold_scores({pred.probabilities}, model.threshold).front();
    files.emplace_back(p.id + std::string(kPatientFileExtension), format_prediction_file(pred));
  }
  fs::create_directories(out_dir);
  for (const auto& [name, content] : files) write_file_atomic(fs::path(out_dir) / name, content);
  out << "wrote " << files.size() << " prediction files to " << out_dir << "\n";
  return kOk;
}

int cmd_evaluate(const std::string& labels_dir, const std::string& predictions_dir,
                 std::string out_path, std::ostream& out) {
  const auto cohort = load_cohort(labels_dir);
  if (!fs::is_directory(predictions_dir))
    throw DataError("not a directory: " + predictions_dir);
  std::map<std::string, fs::path> prediction_files;
  for (const auto& entry : fs::directory_iterator(predictions_dir))
    if (entry.is_regular_file() && entry.path().extension() == kPatientFileExtension)
      prediction_files.emplace(entry.path().stem().string(), entry.path());

  std::vector<std::string> unmatched;
  for (const auto& p : cohort.patients)
    if (!prediction_files.count(p.id)) unmatched.push_back(p.id + " (no prediction)");
  for (const auto& [stem, path] : prediction_files) {
    const bool known = std::any_of(cohort.patients.begin(), cohort.patients.end(),
                                   [&](const PatientRecord& p) { return p.id == stem; });
    if (!known) unmatched.push_back(stem + " (no label file)");
  }
  if (!unmatched.empty()) {
    std::string msg = "label and prediction files do not match:";
    for (const auto& u : unmatched) msg += " " + u;
    throw DataError(msg);
  }

  std::vector<std::vector<double>> scores;
  PatientLabels predictions;
  for (const auto& p : cohort.patients) {
    auto pred = parse_prediction_file(read_file(prediction_files.at(p.id)));
    if (pred.labels.size() != p.hour_count())
      throw DataError("patient " + p.id + ": " + std::to_string(pred.labels.size()) +
                      " predictions for " + std::to_string(p.hour_count()) + " hours");
    scores.push_back(std::move(pred.probabilities));
    predictions.push_back(std::move(pred.labels));
  }
  const auto report = evaluate(scores, predictions, cohort_labels(cohort), UtilityConfig{});
  out << metrics_text(report);
  if (out_path.empty()) out_path = (fs::path(predictions_dir) / "evaluation.json").string();
  write_file_atomic(out_path, metrics_to_json(report).dump(2) + "\n");
  return kOk;
}

int cmd_cv(const std::string& data, const std::string& config_path, const std::string& out_dir,
           std::ostream& out) {
  const auto config = config_or_default(config_path);
  const auto pipeline = run_cv(load_cohort(data), config);
  fs::create_directories(out_dir);
  write_file_atomic(fs::path(out_dir) / "cv_report.json",
                    cv_report_to_json(pipeline.report).dump(2) + "\n");
  for (const auto& g : pipeline.report.grid)
    out << "minority fraction " << g.minority_fraction << ": mean utility "
        << (g.mean_utility ? std::to_string(*g.mean_utility) : std::string("n/a")) << "\n";
  out << "selected " << pipeline.report.selected_fraction << ", threshold "
      << pipeline.report.selected_threshold << "\n";
  return kOk;
}

int cmd_experiment(const std::string& data, const std::string& config_path,
                   const std::string& out_dir, std::optional<Ablation> ablation,
                   std::ostream& out) {
  auto config = config_or_default(config_path);
  if (ablation) config.ablation = *ablation;
  config.validate();
  const auto bundle = run_experiment(load_cohort(data), config);
  write_bundle(bundle.pipeline, out_dir);
  out << preprocess_report(bundle.pipeline.model.preprocessing);
  out << "internal test set (" << bundle.test_ids.size() << " patients):\n";
  out << metrics_text(*bundle.pipeline.report.test_metrics);
  return kOk;
}

int cmd_synth(const SyntheticOptions& options, const std::string& out_dir, std::ostream& out) {
  const auto cohort = generate_synthetic_cohort(options);
  fs::create_directories(out_dir);
  for (const auto& p : cohort.patients)
    write_file_atomic(fs::path(out_dir) / (p.id + std::string(kPatientFileExtension)),
                      format_patient_file(p, cohort.catalog));
  out << "wrote " << cohort.size() << " patients (" << cohort.septic_count() << " septic) to "
      << out_dir << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Early sepsis prediction: imputation, RUSBoost trees, utility scoring"};
  app.require_subcommand(1);

  std::string data, config_path, out_dir, model_path, labels_dir, predictions_dir;

  auto* train = app.add_subcommand("train", "cross-validate, fit the final model, write the bundle");
  train->add_option("--data", data, "directory of patient .psv files")->required();
  train->add_option("--config", config_path, "experiment config (JSON)");
  train->add_option("--out", out_dir, "output directory")->required();

  auto* predict = app.add_subcommand("predict", "write one prediction file per patient");
  predict->add_option("--model", model_path, "model.json")->required();
  predict->add_option("--data", data, "directory of patient .psv files")->required();
  predict->add_option("--out", out_dir, "output directory")->required();

  std::string eval_out;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score prediction files against labels");
  evaluate_cmd->add_option("--labels", labels_dir, "directory of patient .psv files")->required();
  evaluate_cmd->add_option("--predictions", predictions_dir, "directory of prediction files")
      ->required();
  evaluate_cmd->add_option("--out", eval_out, "JSON report path");

  auto* cv = app.add_subcommand("cv", "minority-fraction selection by k-fold cross-validation");
  cv->add_option("--data", data, "directory of patient .psv files")->required();
  cv->add_option("--config", config_path, "experiment config (JSON)");
  cv->add_option("--out", out_dir, "output directory")->required();

  std::string ablate_kind = "none";
  double ablate_threshold = Ablation{}.missing_threshold;
  double ablate_k = Ablation{}.iqr_k;
  auto* experiment = app.add_subcommand("experiment", "80/20 split, cross-validation, test report");
  auto* ablate = app.add_subcommand("ablate", "experiment with one preprocessing ablation");
  for (auto* sub : {experiment, ablate}) {
    sub->add_option("--data", data, "directory of patient .psv files")->required();
    sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--out", out_dir, "output directory")->required();
  }
  ablate->add_option("--ablate", ablate_kind, "none | drop-sparse | iqr | delta")
      ->required()
      ->check(CLI::IsMember({"none", "drop-sparse", "iqr", "delta"}));
  ablate->add_option("--threshold", ablate_threshold, "missing-fraction threshold (drop-sparse)");
  ablate->add_option("--k", ablate_k, "IQR multiplier (iqr)");

  SyntheticOptions synth_options;
  auto* synth = app.add_subcommand("synth", "generate a synthetic challenge-format cohort");
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--patients", synth_options.patients, "number of patients");
  synth->add_option("--prevalence", synth_options.prevalence, "fraction of septic patients");
  synth->add_option("--missing", synth_options.missing_rate, "missing rate of time-varying values");
  synth->add_option("--seed", synth_options.seed, "generator seed");

  auto* config_cmd = app.add_subcommand("config", "print the default experiment config");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (train->parsed()) return cmd_train(data, config_path, out_dir, out);
    if (predict->parsed()) return cmd_predict(model_path, data, out_dir, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(labels_dir, predictions_dir, eval_out, out);
    if (cv->parsed()) return cmd_cv(data, config_path, out_dir, out);
    if (experiment->parsed()) return cmd_experiment(data, config_path, out_dir, std::nullopt, out);
    if (ablate->parsed()) {
      Ablation a;
      a.kind = parse_ablation_kind(ablate_kind);
      a.missing_threshold = ablate_threshold;
      a.iqr_k = ablate_k;
      return cmd_experiment(data, config_path, out_dir, a, out);
    }
    if (synth->parsed()) return cmd_synth(synth_options, out_dir, out);
    if (config_cmd->parsed()) {
      out << config_to_json(ExperimentConfig{}).dump(2) << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const ArgumentError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const UndefinedMetricError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUsage;
}

}  // namespace sepsis::cli

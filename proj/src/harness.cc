#include "sepsis/harness.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "sepsis/model_io.h"
#include "sepsis/report_io.h"

namespace sepsis {

namespace {

// Offsets keep the split, the folds and the booster on distinct streams.
constexpr std::uint64_t kFoldSeedOffset = 1;
constexpr std::uint64_t kBoostSeedOffset = 2;

constexpr double kUtilityTieTolerance = 1e-9;

bool has_both_classes(const InstanceMatrix& m) {
  const auto pos = m.positive_count();
  return pos > 0 && pos < m.rows();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1)");
  if (folds < 2) throw ConfigError("folds must be >= 2");
  if (minority_grid.empty()) throw ConfigError("minority_grid must not be empty");
  for (double f : minority_grid)
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("minority_grid values must lie in (0, 1)");
  boost.validate();
  imputation.validate();
  utility.validate();
  if (!(ablation.missing_threshold >= 0.0 && ablation.missing_threshold <= 1.0))
    throw ConfigError("ablation.threshold must lie in [0, 1]");
  if (!(ablation.iqr_k > 0.0)) throw ConfigError("ablation.k must be positive");
}

PreprocessOptions ExperimentConfig::preprocess_options() const {
  return {imputation, weighting, ablation};
}

BoostConfig ExperimentConfig::boost_for(double minority_fraction) const {
  BoostConfig b = boost;
  b.minority_fraction = minority_fraction;
  b.seed = seed + kBoostSeedOffset;
  return b;
}

std::vector<double> predict_patient(const EnsembleModel& model, const PatientRecord& record) {
  const auto rows = transform_patient(record, model.preprocessing);
  std::vector<double> scores(rows.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) scores[r] = ensemble_score(model, rows.row(r));
  return scores;
}

std::vector<std::vector<double>> score_cohort(const EnsembleModel& model, const Cohort& cohort) {
  std::vector<std::vector<double>> out;
  out.reserve(cohort.size());
  for (const auto& p : cohort.patients) out.push_back(predict_patient(model, p));
  return out;
}

PatientLabels threshold_scores(const std::vector<std::vector<double>>& scores, double threshold) {
  PatientLabels out;
  out.reserve(scores.size());
  for (const auto& s : scores) {
    std::vector<int> labels(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) labels[t] = s[t] >= threshold ? 1 : 0;
    out.push_back(std::move(labels));
  }
  return out;
}

PatientLabels cohort_labels(const Cohort& cohort) {
  PatientLabels out;
  out.reserve(cohort.size());
  for (const auto& p : cohort.patients) out.push_back(p.labels);
  return out;
}

BoostResult train_model(const Cohort& cohort, const ExperimentConfig& config,
                        double minority_fraction) {
  auto prepared = fit_preprocess(cohort, config.preprocess_options());
  if (!has_both_classes(prepared.matrix))
    throw ArgumentError("training data contains a single class");
  auto result = train_rusboost(prepared.matrix, config.boost_for(minority_fraction));
  result.model.preprocessing = std::move(prepared.state);
  return result;
}

double tune_threshold(const std::vector<std::vector<double>>& scores, const PatientLabels& labels,
                      const UtilityConfig& cfg) {
  if (scores.size() != labels.size())
    throw ArgumentError("tune_threshold: scores and labels differ in patient count");
  struct Hour {
    double score;
    double gain;  // utility(predict 1) - utility(predict 0)
  };
  std::vector<Hour> hours;
  double base = 0.0;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (scores[p].size() != labels[p].size())
      throw ArgumentError("tune_threshold: scores and labels differ in hour count");
    const auto u = hour_utilities(labels[p], cfg);
    for (std::size_t t = 0; t < u.size(); ++t) {
      base += u[t].if_negative;
      hours.push_back({scores[p][t], u[t].if_positive - u[t].if_negative});
    }
  }
  if (hours.empty()) throw ArgumentError("tune_threshold: empty validation set");
  std::stable_sort(hours.begin(), hours.end(),
                   [](const Hour& a, const Hour& b) { return a.score > b.score; });

  std::vector<double> candidates;
  candidates.reserve(hours.size() + 1);
  for (const auto& h : hours) candidates.push_back(h.score);
  candidates.push_back(0.5);
  std::sort(candidates.begin(), candidates.end(), std::greater<>());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Sweep thresholds downward; hours with score >= c are predicted positive.
  double best_threshold = candidates.front();
  double best_total = 0.0;
  bool have_best = false;
  double total = base;
  std::size_t next = 0;
  for (double c : candidates) {
    while (next < hours.size() && hours[next].score >= c) total += hours[next++].gain;
    if (!have_best || total > best_total + kUtilityTieTolerance) {
      best_total = total;
      best_threshold = c;
      have_best = true;
    }
  }
  return best_threshold;
}

namespace {

MetricsReport evaluate_model(const EnsembleModel& model, const Cohort& cohort,
                             const UtilityConfig& cfg,
                             std::vector<std::vector<double>>* scores_out = nullptr) {
  auto scores = score_cohort(model, cohort);
  const auto report =
      evaluate(scores, threshold_scores(scores, model.threshold), cohort_labels(cohort), cfg);
  if (scores_out) *scores_out = std::move(scores);
  return report;
}

}  // namespace

TrainedPipeline run_cv(const Cohort& train, const ExperimentConfig& config) {
  config.validate();
  if (train.empty()) throw ArgumentError("cross-validation on an empty cohort");
  const auto septic = train.septic_count();
  if (septic == 0 || septic == train.size())
    throw ArgumentError("cross-validation needs septic and non-septic patients");

  auto grid = config.minority_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const auto folds =
      stratified_kfold_partition(train, config.folds, config.seed + kFoldSeedOffset);

  TrainedPipeline out;
  auto& report = out.report;
  for (double f : grid) report.grid.push_back({f, {}, std::nullopt});

  // Out-of-fold scores per grid point, in fold order, for threshold tuning.
  std::vector<std::vector<std::vector<double>>> oof_scores(grid.size());
  std::vector<PatientLabels> oof_labels(grid.size());

  for (std::size_t k = 0; k < folds.size(); ++k) {
    std::vector<std::string> fit_ids;
    for (std::size_t j = 0; j < folds.size(); ++j)
      if (j != k) fit_ids.insert(fit_ids.end(), folds[j].begin(), folds[j].end());
    const Cohort fit_part = train.subset(fit_ids);
    const Cohort held_out = train.subset(folds[k]);

    std::optional<PreparedData> prepared;
    std::string fold_error;
    try {
      prepared = fit_preprocess(fit_part, config.preprocess_options());
      if (!has_both_classes(prepared->matrix))
        fold_error = "training folds contain a single class";
    } catch (const Error& e) {
      fold_error = e.what();
    }

    for (std::size_t g = 0; g < grid.size(); ++g) {
      FoldResult fr;
      fr.fold = static_cast<int>(k);
      if (!fold_error.empty()) {
        fr.error = fold_error;
      } else {
        try {
          auto trained = train_rusboost(prepared->matrix, config.boost_for(grid[g]));
          trained.model.preprocessing = prepared->state;
          std::vector<std::vector<double>> scores;
          auto metrics = evaluate_model(trained.model, held_out, config.utility, &scores);
          if (!metrics.utility) {
            fr.error = "held-out fold has undefined utility (no septic patients)";
          } else {
            fr.metrics = metrics;
            for (std::size_t p = 0; p < held_out.size(); ++p) {
              oof_scores[g].push_back(std::move(scores[p]));
              oof_labels[g].push_back(held_out.patients[p].labels);
            }
          }
        } catch (const Error& e) {
          fr.error = e.what();
        }
      }
      if (!fr.error.empty())
        spdlog::warn("fold {} (minority fraction {}): skipped: {}", k, grid[g], fr.error);
      report.grid[g].folds.push_back(std::move(fr));
    }
  }

  std::optional<std::size_t> selected;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto& point = report.grid[g];
    double sum = 0.0;
    int n = 0;
    for (const auto& fr : point.folds)
      if (fr.metrics) {
        sum += *fr.metrics->utility;
        ++n;
      }
    if (n == 0) continue;
    point.mean_utility = sum / n;
    if (!selected || *point.mean_utility > *report.grid[*selected].mean_utility)
      selected = g;
  }
  if (!selected) throw DataError("cross-validation failed: every fold was skipped");
  report.selected_fraction = grid[*selected];
  report.selected_threshold =
      config.threshold_tuning
          ? tune_threshold(oof_scores[*selected], oof_labels[*selected], config.utility)
          : 0.5;

  auto final_fit = train_model(train, config, report.selected_fraction);
  out.model = std::move(final_fit.model);
  out.model.threshold = report.selected_threshold;
  out.loss_curve = std::move(final_fit.loss_curve);

  report.features = out.model.preprocessing.feature_names;
  report.removed_features = out.model.preprocessing.removed_features;
  report.fences = out.model.preprocessing.fences;
  report.train_metrics = evaluate_model(out.model, train, config.utility);
  out.train_confusion = report.train_metrics.confusion;
  return out;
}

ExperimentBundle run_experiment(const Cohort& cohort, const ExperimentConfig& config) {
  config.validate();
  if (cohort.empty()) throw ArgumentError("experiment on an empty cohort");
  auto split = split_cohort(cohort, config.train_fraction, config.seed);
  if (split.test.empty())
    throw DataError("internal test split is empty; the cohort is too small");

  ExperimentBundle bundle;
  for (const auto& p : split.train.patients) bundle.train_ids.push_back(p.id);
  for (const auto& p : split.test.patients) bundle.test_ids.push_back(p.id);
  bundle.pipeline = run_cv(split.train, config);
  bundle.pipeline.report.test_metrics =
      evaluate_model(bundle.pipeline.model, split.test, config.utility);
  return bundle;
}

void write_bundle(const TrainedPipeline& pipeline, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / "model.json", model_to_json(pipeline.model).dump(2) + "\n");
  write_file_atomic(out_dir / "metrics_train.json",
                    metrics_to_json(pipeline.report.train_metrics).dump(2) + "\n");
  if (pipeline.report.test_metrics)
    write_file_atomic(out_dir / "metrics_test.json",
                      metrics_to_json(*pipeline.report.test_metrics).dump(2) + "\n");
  write_file_atomic(out_dir / "loss_curve.csv", loss_curve_csv(pipeline.loss_curve));
  write_file_atomic(out_dir / "confusion_train.csv", confusion_csv(pipeline.train_confusion));
  write_file_atomic(out_dir / "cv_report.json", cv_report_to_json(pipeline.report).dump(2) + "\n");
  write_file_atomic(out_dir / "preprocess_report.txt",
                    preprocess_report(pipeline.model.preprocessing));
}

}  // namespace sepsis

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sepsis/boost.h"
#include "sepsis/ingest.h"
#include "sepsis/metrics.h"
#include "sepsis/preprocess.h"

namespace sepsis {

struct ExperimentConfig {
  // Drives the train/test split, fold assignment and boosting RNG.
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  int folds = 3;
  BoostConfig boost;
  std::vector<double> minority_grid = {0.35, 0.50, 0.65};
  ImputationPolicy imputation;
  WeightingPolicy weighting;
  Ablation ablation;
  bool threshold_tuning = true;
  UtilityConfig utility;

  void validate() const;
  PreprocessOptions preprocess_options() const;
  // Boosting settings for one training run at the given minority fraction.
  BoostConfig boost_for(double minority_fraction) const;
};

struct FoldResult {
  int fold = 0;
  std::optional<MetricsReport> metrics;
  std::string error;  // set when the fold was skipped
};

struct GridPointResult {
  double minority_fraction = 0.0;
  std::vector<FoldResult> folds;
  std::optional<double> mean_utility;
};

struct CvReport {
  std::vector<GridPointResult> grid;
  double selected_fraction = 0.0;
  double selected_threshold = 0.5;
  std::vector<std::string> features;
  std::vector<std::string> removed_features;
  std::vector<IqrFence> fences;
  MetricsReport train_metrics;
  std::optional<MetricsReport> test_metrics;
};

struct TrainedPipeline {
  CvReport report;
  EnsembleModel model;
  LossCurve loss_curve;
  ConfusionCounts train_confusion;
};

// Scores every hour of a raw record with the model's stored preprocessing.
std::vector<double> predict_patient(const EnsembleModel& model, const PatientRecord& record);

std::vector<std::vector<double>> score_cohort(const EnsembleModel& model, const Cohort& cohort);

PatientLabels threshold_scores(const std::vector<std::vector<double>>& scores, double threshold);

PatientLabels cohort_labels(const Cohort& cohort);

// Fits preprocessing on `cohort` and trains one boosted model.
BoostResult train_model(const Cohort& cohort, const ExperimentConfig& config,
                        double minority_fraction);

// Threshold maximising normalised utility over the candidates {distinct
// scores} + {0.5}; ties go to the largest threshold.
double tune_threshold(const std::vector<std::vector<double>>& scores, const PatientLabels& labels,
                      const UtilityConfig& cfg);

// k-fold selection of the minority fraction by mean fold utility, threshold
// tuning on pooled out-of-fold scores, then a final fit on all of `train`.
TrainedPipeline run_cv(const Cohort& train, const ExperimentConfig& config);

struct ExperimentBundle {
  TrainedPipeline pipeline;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

// Patient-level train/test split, run_cv on the train side, evaluation on
// the held-out side.
ExperimentBundle run_experiment(const Cohort& cohort, const ExperimentConfig& config);

// model.json, metrics_train.json, [metrics_test.json,] loss_curve.csv,
// confusion_train.csv, cv_report.json, preprocess_report.txt
void write_bundle(const TrainedPipeline& pipeline, const std::filesystem::path& out_dir);

}  // namespace sepsis

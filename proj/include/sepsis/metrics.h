#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sepsis/common.h"

namespace sepsis {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth);

struct AccuracyF {
  double accuracy = 0.0;
  double f_measure = 0.0;
};

// F is 0 when there are neither true nor predicted positives.
AccuracyF accuracy_f_measure(const ConfusionCounts& counts);

// Probability that a random positive outranks a random negative, ties
// counting one half.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Step-interpolated precision-recall area; tied scores form one threshold.
double auprc(std::span<const double> scores, std::span<const int> labels);

// Clinical utility constants. Times are hours relative to sepsis onset,
// which is reconstructed as first positive label + label_lead.
struct UtilityConfig {
  double dt_early = -12.0;
  double dt_optimal = -6.0;
  double dt_late = 3.0;
  double max_u_tp = 1.0;
  double min_u_fn = -2.0;
  double u_fp = -0.05;
  double u_tn = 0.0;
  double label_lead = 6.0;
  // Missed positive hours after the late bound keep costing min_u_fn. When
  // false, hours past the window score zero whatever the prediction.
  bool penalize_after_window = true;

  void validate() const;
  bool operator==(const UtilityConfig&) const = default;
};

// What one hour contributes for either prediction.
struct HourUtility {
  double if_negative = 0.0;
  double if_positive = 0.0;
};

std::vector<HourUtility> hour_utilities(std::span<const int> labels,
                                        const UtilityConfig& cfg);

double utility_patient(std::span<const int> predicted, std::span<const int> labels,
                       const UtilityConfig& cfg);

// Per-hour predictions that attain the best contribution at every hour
// (predicting 1 wherever that is at least as good as 0).
std::vector<int> optimal_predictions(std::span<const int> labels,
                                     const UtilityConfig& cfg);

using PatientLabels = std::vector<std::vector<int>>;

struct UtilityTotals {
  double observed = 0.0;
  double inaction = 0.0;
  double optimal = 0.0;

  // (observed - inaction) / (optimal - inaction)
  double normalized() const;
};

UtilityTotals utility_totals(const PatientLabels& predictions, const PatientLabels& labels,
                             const UtilityConfig& cfg);

double utility_normalized(const PatientLabels& predictions, const PatientLabels& labels,
                          const UtilityConfig& cfg);

struct MetricsReport {
  // Undefined (nullopt) when the evaluated hours contain a single class.
  std::optional<double> auroc;
  std::optional<double> auprc;
  double accuracy = 0.0;
  double f_measure = 0.0;
  std::optional<double> utility;
  ConfusionCounts confusion;
  std::size_t patients = 0;
};

// Metrics over patient-aligned per-hour scores, binary predictions, labels.
MetricsReport evaluate(const std::vector<std::vector<double>>& scores,
                       const PatientLabels& predictions, const PatientLabels& labels,
                       const UtilityConfig& cfg);

}  // namespace sepsis

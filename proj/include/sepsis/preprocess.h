#pragma once

#include <span>
#include <string>
#include <vector>

#include "sepsis/ingest.h"

namespace sepsis {

struct ImputationPolicy {
  // Series with fewer observed values are treated as noise and left alone.
  int min_observations = 3;
  // Carry the first/last observed value outward instead of leaving the
  // leading and trailing gaps missing.
  bool extrapolate_ends = false;

  void validate() const;
  bool operator==(const ImputationPolicy&) const = default;
};

struct WeightingPolicy {
  std::vector<std::string> squared_features = {"Lactate", "MAP", "HR", "Resp"};

  bool operator==(const WeightingPolicy&) const = default;
};

// Patient-hours flattened into a row-major matrix. Rows keep a reference to
// the patient (index into the source cohort) and hour they came from.
struct InstanceMatrix {
  std::vector<std::string> feature_names;
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::size_t> patient_index;
  std::vector<std::size_t> hour_index;

  std::size_t rows() const { return labels.size(); }
  std::size_t n_features() const { return feature_names.size(); }
  double at(std::size_t row, std::size_t feature) const {
    return values[row * n_features() + feature];
  }
  double& at(std::size_t row, std::size_t feature) {
    return values[row * n_features() + feature];
  }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * n_features(), n_features()};
  }

  void append_row(std::span<const double> row, int label,
                  std::size_t patient = 0, std::size_t hour = 0);
  std::size_t positive_count() const;

  // Test/tooling helper: builds a matrix from dense rows with generic
  // feature names f0, f1, ...
  static InstanceMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                  const std::vector<int>& labels);
};

// Linear interpolation of interior gaps. Observed values never change.
std::vector<double> impute_series(std::span<const double> values,
                                  const ImputationPolicy& policy);

// Imputes time-varying columns, fills static columns from any observed value
// and leaves every other column (ICULOS) untouched.
PatientRecord impute_patient(const PatientRecord& record,
                             const FeatureCatalog& catalog,
                             const ImputationPolicy& policy);

// Squares the policy's features in place. Negative values are clamped to zero
// first; returns how many were clamped.
std::size_t apply_feature_weights(PatientRecord& record,
                                  const FeatureCatalog& catalog,
                                  const WeightingPolicy& policy);
std::size_t apply_feature_weights(InstanceMatrix& matrix,
                                  const WeightingPolicy& policy);

// One row per patient-hour, in cohort order.
InstanceMatrix flatten(const Cohort& cohort);

struct DropResult {
  InstanceMatrix matrix;
  std::vector<std::string> removed;
};

// Removes columns whose missing fraction strictly exceeds the threshold.
DropResult drop_sparse_features(const InstanceMatrix& matrix,
                                double missing_fraction_threshold);

struct Quartiles {
  double q1 = 0.0;
  double q3 = 0.0;
};

// Quartiles by linear interpolation between order statistics at the
// 1-based positions p*(n+1), clamped to the sample range. `sorted` must be
// ascending and non-empty.
Quartiles exclusive_quartiles(std::span<const double> sorted);

struct IqrFence {
  std::string feature;
  double q1 = 0.0;
  double q3 = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  bool operator==(const IqrFence&) const = default;
};

struct IqrResult {
  InstanceMatrix matrix;
  std::vector<IqrFence> fences;
  std::size_t masked = 0;
};

// Masks values outside [Q1 - k*IQR, Q3 + k*IQR] as missing, per column.
// Columns without observed values get no fence.
IqrResult iqr_outlier_filter(const InstanceMatrix& matrix, double k);

// Applies previously computed fences (matched by feature name).
std::size_t apply_fences(InstanceMatrix& matrix,
                         const std::vector<IqrFence>& fences);

// Catalog with one "<name>_delta" column appended per time-varying feature.
FeatureCatalog with_delta_features(const FeatureCatalog& catalog);

// Appends hour-over-hour differences of each time-varying feature.
PatientRecord add_delta_features(const PatientRecord& record,
                                 const FeatureCatalog& catalog);

enum class AblationKind { kNone, kDropSparse, kIqr, kDelta };

std::string to_string(AblationKind kind);
AblationKind parse_ablation_kind(std::string_view text);

struct Ablation {
  AblationKind kind = AblationKind::kNone;
  double missing_threshold = 0.9;
  double iqr_k = 1.5;

  bool operator==(const Ablation&) const = default;
};

struct PreprocessOptions {
  ImputationPolicy imputation;
  WeightingPolicy weighting;
  Ablation ablation;
};

// Everything needed to turn a raw patient record into model input rows.
struct PreprocessState {
  FeatureCatalog catalog;
  ImputationPolicy imputation;
  WeightingPolicy weighting;
  Ablation ablation;
  std::vector<std::string> feature_names;
  std::vector<std::string> removed_features;
  std::vector<IqrFence> fences;

  bool operator==(const PreprocessState&) const = default;
};

struct PreparedData {
  InstanceMatrix matrix;
  PreprocessState state;
};

// Impute, optional delta features, squaring, flatten, then the optional
// column-level ablation. Fences and dropped columns are fitted on `cohort`.
PreparedData fit_preprocess(const Cohort& cohort,
                            const PreprocessOptions& options);

// Replays a fitted state on one raw record.
InstanceMatrix transform_patient(const PatientRecord& record,
                                 const PreprocessState& state);

// Human-readable summary: features used, columns removed, fences.
std::string preprocess_report(const PreprocessState& state);

}  // namespace sepsis

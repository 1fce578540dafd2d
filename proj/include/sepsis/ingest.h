#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sepsis/common.h"

namespace sepsis {

inline constexpr std::string_view kLabelColumn = "SepsisLabel";
inline constexpr std::string_view kPatientFileExtension = ".psv";

// Ordered column set of a patient file plus the feature groups the
// preprocessing stages act on.
struct FeatureCatalog {
  std::vector<std::string> names;
  // Features replaced by their square before training.
  std::vector<std::string> weighted_set;
  // Features that are imputed along the time axis and get delta features.
  std::vector<std::string> time_varying_set;
  // Per-stay constants (demographics); forward/back filled.
  std::vector<std::string> static_set;

  // The 40 challenge columns in file order.
  static FeatureCatalog challenge_default();

  std::size_t size() const { return names.size(); }
  // Index of `name`, or nullopt.
  std::optional<std::size_t> index_of(std::string_view name) const;
  // Like index_of, but throws ArgumentError for unknown names.
  std::size_t require_index(std::string_view name) const;
  bool is_time_varying(std::size_t column) const;
  bool is_static(std::size_t column) const;

  // Checks the group invariants (unique names, groups are subsets).
  void validate() const;

  bool operator==(const FeatureCatalog&) const = default;
};

// One hour of observations; slot order follows the catalog.
using FeatureVector = std::vector<double>;

struct PatientRecord {
  std::string id;
  std::vector<FeatureVector> hours;
  std::vector<int> labels;

  std::size_t hour_count() const { return hours.size(); }
  bool is_septic() const;
  // First hour with label 1; used as onset even for non-monotone labels.
  std::optional<std::size_t> first_positive_hour() const;
  bool labels_monotone() const;

  bool operator==(const PatientRecord&) const = default;
};

struct Cohort {
  std::vector<PatientRecord> patients;
  FeatureCatalog catalog;

  std::size_t size() const { return patients.size(); }
  bool empty() const { return patients.empty(); }
  std::size_t total_hours() const;
  std::size_t septic_count() const;
  // Patients with the given ids, in the order of `ids`.
  Cohort subset(const std::vector<std::string>& ids) const;
  // Throws DataError on duplicate ids.
  void validate_unique_ids() const;
};

// Parses a '|'-separated patient file. `id` becomes the record id.
PatientRecord parse_patient_file(std::string_view text,
                                 const FeatureCatalog& catalog,
                                 std::string id = {});

// Inverse of parse_patient_file. Values use the shortest representation that
// reads back to the same double; missing slots are written as "NaN".
std::string format_patient_file(const PatientRecord& record,
                                const FeatureCatalog& catalog);

PatientRecord load_patient_file(const std::filesystem::path& path,
                                const FeatureCatalog& catalog);

// Loads every *.psv file in `directory`, sorted by id (file stem).
Cohort load_cohort(const std::filesystem::path& directory,
                   const FeatureCatalog& catalog =
                       FeatureCatalog::challenge_default());

struct CohortSplit {
  Cohort train;
  Cohort test;
  std::optional<std::string> warning;
};

// Patient-level random partition with |train| = round(train_fraction * N).
CohortSplit split_cohort(const Cohort& cohort, double train_fraction,
                         std::uint64_t seed);

using Fold = std::vector<std::string>;

// k disjoint folds of patient ids whose sizes differ by at most one.
std::vector<Fold> kfold_partition(const Cohort& cohort, int k,
                                  std::uint64_t seed);

// As kfold_partition, but septic and non-septic patients are dealt
// separately so each fold receives a proportional share of both.
std::vector<Fold> stratified_kfold_partition(const Cohort& cohort, int k,
                                             std::uint64_t seed);

}  // namespace sepsis

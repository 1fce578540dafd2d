#include "sepsis/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace sepsis {

namespace {

struct FeatureModel {
  double mean;
  double between_sd;  // patient-level offset
  double within_sd;   // hour-to-hour noise
  bool non_negative;
};

// Rough physiological ranges, in catalog order (time-varying columns only).
constexpr std::array<FeatureModel, 34> kFeatureModels = {{
    {80, 10, 5, true},      {97, 1.5, 1.5, true},  {37, 0.4, 0.3, true},
    {122, 15, 8, true},     {82, 10, 6, true},     {62, 8, 5, true},
    {18, 3, 2, true},       {33, 4, 3, true},      {0, 3, 1.5, false},
    {24, 3, 1.5, true},     {0.5, 0.1, 0.05, true}, {7.39, 0.05, 0.03, true},
    {40, 6, 3, true},       {95, 3, 2, true},      {100, 80, 20, true},
    {22, 12, 3, true},      {100, 40, 10, true},   {8.0, 0.8, 0.3, true},
    {105, 4, 2, true},      {1.4, 1.0, 0.2, true}, {1.5, 1.5, 0.3, true},
    {130, 30, 20, true},    {1.6, 0.5, 0.3, true}, {2.0, 0.3, 0.15, true},
    {3.5, 0.8, 0.3, true},  {4.1, 0.4, 0.3, true}, {1.5, 1.5, 0.3, true},
    {1, 2, 0.3, true},      {31, 4, 1.5, true},    {10.5, 1.5, 0.6, true},
    {40, 12, 5, true},      {11, 4, 2, true},      {280, 100, 30, true},
    {200, 80, 20, true},
}};

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

Cohort generate_synthetic_cohort(const SyntheticOptions& options) {
  if (options.patients == 0) throw ArgumentError("synthetic cohort needs at least one patient");
  if (!(options.prevalence >= 0.0 && options.prevalence <= 1.0))
    throw ArgumentError("prevalence must lie in [0, 1]");
  if (!(options.missing_rate >= 0.0 && options.missing_rate < 1.0))
    throw ArgumentError("missing_rate must lie in [0, 1)");
  if (options.min_hours < 8 || options.max_hours < options.min_hours)
    throw ArgumentError("need 8 <= min_hours <= max_hours");

  Cohort cohort;
  cohort.catalog = FeatureCatalog::challenge_default();
  const auto& catalog = cohort.catalog;
  const std::size_t hr = catalog.require_index("HR");
  const std::size_t map = catalog.require_index("MAP");
  const std::size_t resp = catalog.require_index("Resp");
  const std::size_t lactate = catalog.require_index("Lactate");

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto n_septic = static_cast<std::size_t>(
      std::llround(options.prevalence * static_cast<double>(options.patients)));
  std::vector<std::size_t> order(options.patients);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> septic(options.patients, false);
  for (std::size_t i = 0; i < n_septic; ++i) septic[order[i]] = true;

  for (std::size_t p = 0; p < options.patients; ++p) {
    PatientRecord rec;
    rec.id = fmt::format("p{:06d}", p + 1);
    const int hours = std::uniform_int_distribution<int>(options.min_hours, options.max_hours)(rng);

    std::vector<double> offsets(kFeatureModels.size());
    for (std::size_t f = 0; f < kFeatureModels.size(); ++f)
      offsets[f] = kFeatureModels[f].between_sd * normal(rng);

    int label_onset = hours;  // never for non-septic patients
    if (septic[p])
      label_onset = std::uniform_int_distribution<int>(std::min(12, hours / 3), hours - 3)(rng);

    const double age = std::round(18.0 + 72.0 * unit(rng));
    const double gender = unit(rng) < 0.55 ? 1.0 : 0.0;
    double unit1 = kMissing, unit2 = kMissing;
    if (unit(rng) < 0.7) {
      unit1 = unit(rng) < 0.5 ? 1.0 : 0.0;
      unit2 = 1.0 - unit1;
    }
    const double hosp_adm = round2(-100.0 * unit(rng));

    for (int t = 0; t < hours; ++t) {
      FeatureVector hour(catalog.size(), kMissing);
      // drift ramps linearly from 12 h before the first positive label
      const double drift =
          septic[p] ? std::max(0.0, static_cast<double>(t - (label_onset - 12)) / 12.0) : 0.0;
      for (std::size_t f = 0; f < kFeatureModels.size(); ++f) {
        const auto& m = kFeatureModels[f];
        double v = m.mean + offsets[f] + m.within_sd * normal(rng);
        if (f == hr) v += 12.0 * options.signal * drift;
        if (f == map) v -= 10.0 * options.signal * drift;
        if (f == resp) v += 5.0 * options.signal * drift;
        if (f == lactate) v += 1.5 * options.signal * drift;
        if (m.non_negative) v = std::max(v, 0.0);
        const bool missing = unit(rng) < options.missing_rate;
        if (!missing) hour[f] = round2(v);
      }
      hour[catalog.require_index("Age")] = age;
      hour[catalog.require_index("Gender")] = gender;
      hour[catalog.require_index("Unit1")] = unit1;
      hour[catalog.require_index("Unit2")] = unit2;
      hour[catalog.require_index("HospAdmTime")] = hosp_adm;
      hour[catalog.require_index("ICULOS")] = t + 1;
      rec.hours.push_back(std::move(hour));
      rec.labels.push_back(t >= label_onset ? 1 : 0);
    }
    cohort.patients.push_back(std::move(rec));
  }
  return cohort;
}

}  // namespace sepsis

#pragma once

#include <cstdint>

#include "sepsis/ingest.h"

namespace sepsis {

// Generator for challenge-shaped cohorts with a known signal, used by the
// end-to-end tests and the `synth` CLI command.
struct SyntheticOptions {
  std::size_t patients = 2000;
  // Fraction of patients that become septic.
  double prevalence = 0.07;
  // Probability that a time-varying value is missing.
  double missing_rate = 0.85;
  int min_hours = 24;
  int max_hours = 60;
  // Scale of the drift in HR, MAP, Resp and Lactate ahead of onset.
  double signal = 1.0;
  std::uint64_t seed = 7;
};

// Septic patients get a linear drift (HR, Resp, Lactate up; MAP down) that
// starts 12 hours before the first positive label. Other features are noise.
Cohort generate_synthetic_cohort(const SyntheticOptions& options);

}  // namespace sepsis

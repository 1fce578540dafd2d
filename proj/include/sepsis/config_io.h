#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "sepsis/harness.h"

namespace sepsis {

// Experiment configuration file. Every key is optional and defaults to the
// values in ExperimentConfig; unknown keys are errors.
//
// {
//   "seed": 42, "train_fraction": 0.8, "folds": 3,
//   "minority_grid": [0.35, 0.5, 0.65], "threshold_tuning": true,
//   "boost": {"cycles": 200, "epsilon_floor": 1e-10, "max_resample_retries": 5,
//             "tree": {"max_splits": 10, "min_leaf_weight": 1.0,
//                      "max_surrogates": 5, "max_depth": 0}},
//   "imputation": {"min_observations": 3, "extrapolate_ends": false},
//   "weighting": {"squared_features": ["Lactate", "MAP", "HR", "Resp"]},
//   "ablation": {"kind": "none", "threshold": 0.9, "k": 1.5},
//   "utility": {"dt_early": -12, "dt_optimal": -6, "dt_late": 3,
//               "max_u_tp": 1, "min_u_fn": -2, "u_fp": -0.05, "u_tn": 0,
//               "label_lead": 6, "penalize_after_window": true}
// }
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

// Parses and validates; throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace sepsis

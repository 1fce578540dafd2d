#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "sepsis/boost.h"

namespace sepsis {

inline constexpr int kModelFormatVersion = 1;

// Self-contained model file: catalog, fitted preprocessing, boosting config
// echo, nested trees with surrogate lists, vote weights and threshold.
nlohmann::ordered_json model_to_json(const EnsembleModel& model);

// Throws ConfigError on schema violations or a format_version mismatch.
EnsembleModel model_from_json(const nlohmann::json& doc);

void save_model(const EnsembleModel& model, const std::filesystem::path& path);
EnsembleModel load_model(const std::filesystem::path& path);

}  // namespace sepsis

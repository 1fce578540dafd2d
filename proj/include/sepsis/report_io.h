#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sepsis/boost.h"
#include "sepsis/harness.h"
#include "sepsis/metrics.h"

namespace sepsis {

inline constexpr std::string_view kPredictionHeader = "PredictedProbability|PredictedLabel";

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

nlohmann::ordered_json metrics_to_json(const MetricsReport& report);
nlohmann::ordered_json cv_report_to_json(const CvReport& report);

// Plain-text rendering of a metrics report.
std::string metrics_text(const MetricsReport& report);

// "cycle,loss" with 1-based cycles.
std::string loss_curve_csv(const LossCurve& curve);

// 2x2 confusion chart, rows = actual class, columns = predicted class.
std::string confusion_csv(const ConfusionCounts& counts);

struct PatientPrediction {
  std::vector<double> probabilities;
  std::vector<int> labels;
};

// One line per hour: probability with six decimals, '|', 0 or 1.
std::string format_prediction_file(const PatientPrediction& prediction);
PatientPrediction parse_prediction_file(std::string_view text);

}  // namespace sepsis

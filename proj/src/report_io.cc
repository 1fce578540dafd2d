#include "sepsis/report_io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace sepsis {

using nlohmann::ordered_json;

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json confusion_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

std::string fmt_optional(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("undefined");
}

}  // namespace

ordered_json metrics_to_json(const MetricsReport& r) {
  return {{"auroc", optional_number(r.auroc)},
          {"auprc", optional_number(r.auprc)},
          {"accuracy", r.accuracy},
          {"f_measure", r.f_measure},
          {"utility", optional_number(r.utility)},
          {"confusion", confusion_json(r.confusion)},
          {"patients", r.patients},
          {"hours", r.confusion.total()}};
}

ordered_json cv_report_to_json(const CvReport& r) {
  ordered_json grid = ordered_json::array();
  for (const auto& g : r.grid) {
    ordered_json folds = ordered_json::array();
    for (const auto& f : g.folds) {
      ordered_json fj;
      fj["fold"] = f.fold;
      if (f.metrics)
        fj["metrics"] = metrics_to_json(*f.metrics);
      else
        fj["error"] = f.error;
      folds.push_back(std::move(fj));
    }
    grid.push_back({{"minority_fraction", g.minority_fraction},
                    {"mean_utility", optional_number(g.mean_utility)},
                    {"folds", std::move(folds)}});
  }
  ordered_json fences = ordered_json::array();
  for (const auto& f : r.fences)
    fences.push_back({{"feature", f.feature},
                      {"q1", f.q1},
                      {"q3", f.q3},
                      {"lower", f.lower},
                      {"upper", f.upper}});
  ordered_json j;
  j["grid"] = std::move(grid);
  j["selected_minority_fraction"] = r.selected_fraction;
  j["selected_threshold"] = r.selected_threshold;
  j["feature_count"] = r.features.size();
  j["features"] = r.features;
  j["removed_features"] = r.removed_features;
  j["iqr_fences"] = std::move(fences);
  j["train_metrics"] = metrics_to_json(r.train_metrics);
  j["test_metrics"] = r.test_metrics ? metrics_to_json(*r.test_metrics) : ordered_json(nullptr);
  return j;
}

std::string metrics_text(const MetricsReport& r) {
  std::string out;
  out += fmt::format("patients   {}\n", r.patients);
  out += fmt::format("hours      {}\n", r.confusion.total());
  out += fmt::format("AUROC      {}\n", fmt_optional(r.auroc));
  out += fmt::format("AUPRC      {}\n", fmt_optional(r.auprc));
  out += fmt::format("Accuracy   {:.4f}\n", r.accuracy);
  out += fmt::format("F-measure  {:.4f}\n", r.f_measure);
  out += fmt::format("Utility    {}\n", fmt_optional(r.utility));
  out += fmt::format("confusion  tp={} fp={} fn={} tn={}\n", r.confusion.tp, r.confusion.fp,
                     r.confusion.fn, r.confusion.tn);
  return out;
}

std::string loss_curve_csv(const LossCurve& curve) {
  std::string out = "cycle,loss\n";
  for (std::size_t i = 0; i < curve.size(); ++i) out += fmt::format("{},{}\n", i + 1, curve[i]);
  return out;
}

std::string confusion_csv(const ConfusionCounts& c) {
  return fmt::format("actual,predicted_0,predicted_1\n0,{},{}\n1,{},{}\n", c.tn, c.fp, c.fn,
                     c.tp);
}

std::string format_prediction_file(const PatientPrediction& prediction) {
  if (prediction.probabilities.size() != prediction.labels.size())
    throw ArgumentError("prediction probabilities and labels differ in length");
  std::string out(kPredictionHeader);
  out += '\n';
  for (std::size_t t = 0; t < prediction.labels.size(); ++t)
    out += fmt::format("{:.6f}|{}\n", prediction.probabilities[t], prediction.labels[t] ? 1 : 0);
  return out;
}

PatientPrediction parse_prediction_file(std::string_view text) {
  PatientPrediction out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kPredictionHeader)
        throw DataError("prediction file header must be '" + std::string(kPredictionHeader) + "'");
      continue;
    }
    if (line.empty()) continue;
    const auto bar = line.find('|');
    if (bar == std::string_view::npos || line.find('|', bar + 1) != std::string_view::npos)
      throw DataError("prediction line " + std::to_string(line_no) + ": expected 2 fields");
    const auto prob_tok = line.substr(0, bar);
    const auto label_tok = line.substr(bar + 1);
    double prob = 0.0;
    auto [ptr, ec] = std::from_chars(prob_tok.data(), prob_tok.data() + prob_tok.size(), prob);
    if (ec != std::errc() || ptr != prob_tok.data() + prob_tok.size() || !std::isfinite(prob))
      throw DataError("prediction line " + std::to_string(line_no) + ": bad probability '" +
                      std::string(prob_tok) + "'");
    if (label_tok != "0" && label_tok != "1")
      throw DataError("prediction line " + std::to_string(line_no) +
                      ": PredictedLabel must be 0 or 1");
    out.probabilities.push_back(prob);
    out.labels.push_back(label_tok == "1" ? 1 : 0);
  }
  if (line_no == 0) throw DataError("empty prediction file");
  return out;
}

}  // namespace sepsis

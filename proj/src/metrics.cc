#include "sepsis/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sepsis {

namespace {

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw ArgumentError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                        " vs " + std::to_string(b) + ")");
}

// Indices ordered by descending score; ties keep index order.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  for (double s : scores)
    if (std::isnan(s)) throw ArgumentError("scores must not be NaN");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth) {
  check_aligned(predicted.size(), truth.size(), "confusion");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1)
      ++(predicted[i] == 1 ? c.tp : c.fn);
    else
      ++(predicted[i] == 1 ? c.fp : c.tn);
  }
  return c;
}

AccuracyF accuracy_f_measure(const ConfusionCounts& c) {
  if (c.total() == 0) throw ArgumentError("accuracy of zero predictions");
  AccuracyF out;
  out.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  out.f_measure = denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
  return out;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_aligned(scores.size(), labels.size(), "auroc");
  const auto order = descending_order(scores);
  const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0)
    throw UndefinedMetricError("AUROC needs both classes");

  // Walk tie blocks from the top: positives in a block beat every negative
  // below it and half of the negatives tied with them.
  double wins = 0.0, neg_seen = 0.0;
  std::size_t i = 0;
  const double total_neg = n_neg;
  while (i < order.size()) {
    std::size_t j = i;
    double pos_block = 0.0, neg_block = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos_block : neg_block) += 1.0;
      ++j;
    }
    const double neg_below = total_neg - neg_seen - neg_block;
    wins += pos_block * (neg_below + 0.5 * neg_block);
    neg_seen += neg_block;
    i = j;
  }
  return wins / (n_pos * n_neg);
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  check_aligned(scores.size(), labels.size(), "auprc");
  const auto order = descending_order(scores);
  const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  if (n_pos == 0.0) throw UndefinedMetricError("AUPRC needs at least one positive");

  double area = 0.0, tp = 0.0, fp = 0.0, prev_recall = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) += 1.0;
      ++j;
    }
    const double recall = tp / n_pos;
    area += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
    i = j;
  }
  return area;
}

void UtilityConfig::validate() const {
  if (!(dt_early < dt_optimal && dt_optimal < dt_late))
    throw ConfigError("utility: need dt_early < dt_optimal < dt_late");
  if (!(max_u_tp > 0.0 && u_tn <= 0.0))
    throw ConfigError("utility: need max_u_tp > 0 >= u_tn");
  if (!(min_u_fn < 0.0)) throw ConfigError("utility: need min_u_fn < 0");
  if (!(u_fp <= 0.0)) throw ConfigError("utility: need u_fp <= 0");
}

std::vector<HourUtility> hour_utilities(std::span<const int> labels,
                                        const UtilityConfig& cfg) {
  std::vector<HourUtility> out(labels.size());
  const auto first = std::find(labels.begin(), labels.end(), 1);
  if (first == labels.end()) {
    for (auto& h : out) h = {cfg.u_tn, cfg.u_fp};
    return out;
  }
  const double onset = static_cast<double>(first - labels.begin()) + cfg.label_lead;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const double d = static_cast<double>(t) - onset;
    HourUtility& h = out[t];
    if (d < cfg.dt_early) {
      h = {0.0, cfg.u_fp};
    } else if (d <= cfg.dt_optimal) {
      h = {0.0, cfg.max_u_tp * (d - cfg.dt_early) / (cfg.dt_optimal - cfg.dt_early)};
    } else if (d <= cfg.dt_late) {
      const double frac = (d - cfg.dt_optimal) / (cfg.dt_late - cfg.dt_optimal);
      h = {cfg.min_u_fn * frac, cfg.max_u_tp * (1.0 - frac)};
    } else {
      const bool penalize = cfg.penalize_after_window && labels[t] == 1;
      h = {penalize ? cfg.min_u_fn : 0.0, 0.0};
    }
  }
  return out;
}

double utility_patient(std::span<const int> predicted, std::span<const int> labels,
                       const UtilityConfig& cfg) {
  check_aligned(predicted.size(), labels.size(), "utility");
  if (labels.empty()) throw ArgumentError("utility of an empty patient");
  const auto hours = hour_utilities(labels, cfg);
  double u = 0.0;
  for (std::size_t t = 0; t < hours.size(); ++t)
    u += predicted[t] == 1 ? hours[t].if_positive : hours[t].if_negative;
  return u;
}

std::vector<int> optimal_predictions(std::span<const int> labels,
                                     const UtilityConfig& cfg) {
  const auto hours = hour_utilities(labels, cfg);
  std::vector<int> out(hours.size());
  for (std::size_t t = 0; t < hours.size(); ++t)
    out[t] = hours[t].if_positive >= hours[t].if_negative ? 1 : 0;
  return out;
}

double UtilityTotals::normalized() const {
  const double range = optimal - inaction;
  if (!(range > 0.0))
    throw UndefinedMetricError(
        "normalized utility is undefined: optimal and inaction utility coincide");
  return (observed - inaction) / range;
}

UtilityTotals utility_totals(const PatientLabels& predictions, const PatientLabels& labels,
                             const UtilityConfig& cfg) {
  check_aligned(predictions.size(), labels.size(), "utility (patients)");
  UtilityTotals totals;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    check_aligned(predictions[p].size(), labels[p].size(), "utility (hours)");
    const auto hours = hour_utilities(labels[p], cfg);
    for (std::size_t t = 0; t < hours.size(); ++t) {
      const auto& h = hours[t];
      totals.observed += predictions[p][t] == 1 ? h.if_positive : h.if_negative;
      totals.inaction += h.if_negative;
      totals.optimal += std::max(h.if_positive, h.if_negative);
    }
  }
  return totals;
}

double utility_normalized(const PatientLabels& predictions, const PatientLabels& labels,
                          const UtilityConfig& cfg) {
  return utility_totals(predictions, labels, cfg).normalized();
}

MetricsReport evaluate(const std::vector<std::vector<double>>& scores,
                       const PatientLabels& predictions, const PatientLabels& labels,
                       const UtilityConfig& cfg) {
  check_aligned(scores.size(), labels.size(), "evaluate (patients)");
  check_aligned(predictions.size(), labels.size(), "evaluate (patients)");
  std::vector<double> flat_scores;
  std::vector<int> flat_pred, flat_labels;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    check_aligned(scores[p].size(), labels[p].size(), "evaluate (hours)");
    check_aligned(predictions[p].size(), labels[p].size(), "evaluate (hours)");
    flat_scores.insert(flat_scores.end(), scores[p].begin(), scores[p].end());
    flat_pred.insert(flat_pred.end(), predictions[p].begin(), predictions[p].end());
    flat_labels.insert(flat_labels.end(), labels[p].begin(), labels[p].end());
  }
  MetricsReport report;
  report.patients = labels.size();
  report.confusion = confusion(flat_pred, flat_labels);
  const auto af = accuracy_f_measure(report.confusion);
  report.accuracy = af.accuracy;
  report.f_measure = af.f_measure;
  const bool has_pos = report.confusion.tp + report.confusion.fn > 0;
  const bool has_neg = report.confusion.fp + report.confusion.tn > 0;
  if (has_pos && has_neg) report.auroc = auroc(flat_scores, flat_labels);
  if (has_pos) report.auprc = auprc(flat_scores, flat_labels);
  const auto totals = utility_totals(predictions, labels, cfg);
  if (totals.optimal > totals.inaction) report.utility = totals.normalized();
  return report;
}

}  // namespace sepsis

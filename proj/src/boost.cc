#include "sepsis/boost.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

namespace sepsis {

void BoostConfig::validate() const {
  if (cycles < 1) throw ConfigError("boost.cycles must be >= 1");
  if (!(minority_fraction > 0.0 && minority_fraction < 1.0))
    throw ConfigError("boost.minority_fraction must lie in (0, 1)");
  if (!(epsilon_floor > 0.0 && epsilon_floor < 0.5))
    throw ConfigError("boost.epsilon_floor must lie in (0, 0.5)");
  if (max_resample_retries < 0)
    throw ConfigError("boost.max_resample_retries must be >= 0");
  tree.validate();
}

void EnsembleModel::validate() const {
  if (trees.empty()) throw ConfigError("model has no trees");
  if (trees.size() != vote_weights.size())
    throw ConfigError("model has " + std::to_string(trees.size()) + " trees but " +
                      std::to_string(vote_weights.size()) + " vote weights");
  for (double a : vote_weights)
    if (!(a > 0.0) || !std::isfinite(a))
      throw ConfigError("model vote weights must be positive and finite");
  for (const auto& t : trees) {
    if (t.nodes.empty()) throw ConfigError("model contains an empty tree");
    if (t.n_features != trees.front().n_features)
      throw ConfigError("model trees disagree on the feature count");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ConfigError("model threshold must lie in [0, 1]");
}

namespace {

// Number of negative rows to keep, or nullopt when no undersampling is needed.
std::optional<std::size_t> negatives_to_draw(std::size_t n_pos, std::size_t n_neg,
                                             double minority_fraction) {
  if (!(minority_fraction > 0.0 && minority_fraction < 1.0))
    throw ArgumentError("minority fraction must lie in (0, 1)");
  if (n_pos == 0 || n_neg == 0) throw ArgumentError("undersampling needs both classes present");
  const double n_min = static_cast<double>(n_pos);
  if (n_min / static_cast<double>(n_pos + n_neg) >= minority_fraction) return std::nullopt;
  return std::min<std::size_t>(
      n_neg, static_cast<std::size_t>(
                 std::llround(n_min * (1.0 - minority_fraction) / minority_fraction)));
}

void split_by_class(std::span<const int> labels, std::vector<std::size_t>& pos,
                    std::vector<std::size_t>& neg) {
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace

std::vector<std::size_t> rus_sample(std::span<const int> labels,
                                    double minority_fraction,
                                    std::mt19937_64& engine) {
  std::vector<std::size_t> pos, neg;
  split_by_class(labels, pos, neg);
  const auto draw = negatives_to_draw(pos.size(), neg.size(), minority_fraction);
  if (!draw) return all_rows(labels.size());
  auto out = pos;
  std::sample(neg.begin(), neg.end(), std::back_inserter(out), *draw, engine);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> rus_sample(std::span<const int> labels,
                                    std::span<const double> weights,
                                    double minority_fraction,
                                    std::mt19937_64& engine) {
  if (weights.size() != labels.size())
    throw ArgumentError("undersampling needs one weight per row");
  std::vector<std::size_t> pos, neg;
  split_by_class(labels, pos, neg);
  const auto draw = negatives_to_draw(pos.size(), neg.size(), minority_fraction);
  if (!draw) return all_rows(labels.size());

  // Efraimidis-Spirakis: keep the rows with the largest log(u) / w.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(neg.size());
  for (auto r : neg) {
    const double u = std::max(unit(engine), std::numeric_limits<double>::min());
    const double key = weights[r] > 0.0 ? std::log(u) / weights[r]
                                        : -std::numeric_limits<double>::infinity();
    keys.emplace_back(key, r);
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(*draw), keys.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });
  auto out = pos;
  for (std::size_t i = 0; i < *draw; ++i) out.push_back(keys[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> rus_sample(std::span<const int> labels,
                                    double minority_fraction, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  return rus_sample(labels, minority_fraction, engine);
}

BoostResult train_rusboost(const InstanceMatrix& data, const BoostConfig& config) {
  config.validate();
  const std::size_t n = data.rows();
  if (n < 2) throw ArgumentError("boosting needs at least two rows");
  const std::size_t n_pos = data.positive_count();
  if (n_pos == 0 || n_pos == n)
    throw ArgumentError("boosting needs both classes in the training data");

  BoostResult result;
  auto& model = result.model;
  model.config = config;
  model.summary.minority_fraction = config.minority_fraction;
  model.summary.seed = config.seed;

  std::mt19937_64 engine(config.seed);
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  std::vector<double> positive_votes(n, 0.0);
  double total_votes = 0.0;
  std::vector<int> predicted(n);
  std::vector<double> sample_weights;

  for (int cycle = 1; cycle <= config.cycles; ++cycle) {
    std::optional<DecisionTree> accepted;
    double epsilon = 1.0;
    int attempt = 0;
    std::size_t sample_size = 0, sample_minority = 0;
    for (; attempt <= config.max_resample_retries; ++attempt) {
      const auto sample = rus_sample(data.labels, weights, config.minority_fraction, engine);
      sample_weights.resize(sample.size());
      for (std::size_t i = 0; i < sample.size(); ++i) sample_weights[i] = weights[sample[i]];
      auto tree = fit_tree(data, sample, sample_weights, config.tree);

      epsilon = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        predicted[r] = tree_predict(tree, data.row(r)).label;
        if (predicted[r] != data.labels[r]) epsilon += weights[r];
      }
      if (epsilon < 0.5) {
        accepted = std::move(tree);
        sample_size = sample.size();
        sample_minority = static_cast<std::size_t>(std::count_if(
            sample.begin(), sample.end(), [&](std::size_t r) { return data.labels[r] == 1; }));
        break;
      }
    }
    if (!accepted) {
      spdlog::warn("boosting stopped at cycle {}: no weak learner below 0.5 error "
                   "after {} attempt(s)",
                   cycle, attempt);
      model.summary.stopped_early = true;
      break;
    }

    if (epsilon <= 0.0) epsilon = config.epsilon_floor;
    const double beta = epsilon / (1.0 - epsilon);
    const double alpha = std::log(1.0 / beta);

    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (predicted[r] == data.labels[r]) weights[r] *= beta;
      sum += weights[r];
    }
    for (auto& w : weights) w /= sum;

    total_votes += alpha;
    std::size_t errors = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (predicted[r] == 1) positive_votes[r] += alpha;
      const int ensemble_label = positive_votes[r] / total_votes >= 0.5 ? 1 : 0;
      errors += ensemble_label != data.labels[r] ? 1 : 0;
    }
    const double loss = static_cast<double>(errors) / static_cast<double>(n);

    model.trees.push_back(std::move(*accepted));
    model.vote_weights.push_back(alpha);
    result.loss_curve.push_back(loss);

    CycleTrace trace;
    trace.cycle = cycle;
    trace.retries = attempt;
    trace.sample_size = sample_size;
    trace.sample_minority = sample_minority;
    trace.epsilon = epsilon;
    trace.vote_weight = alpha;
    trace.weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    trace.min_weight = *std::min_element(weights.begin(), weights.end());
    result.trace.push_back(trace);
  }

  if (model.trees.empty())
    throw Error("boosting produced no tree: every weak learner had error >= 0.5");
  model.summary.cycles_run = static_cast<int>(model.trees.size());
  return result;
}

double ensemble_score(const EnsembleModel& model, std::span<const double> instance) {
  if (model.trees.empty()) throw ArgumentError("model has no trees");
  if (instance.size() != model.n_features())
    throw ArgumentError("instance has " + std::to_string(instance.size()) +
                        " features, model expects " + std::to_string(model.n_features()));
  double positive = 0.0, total = 0.0;
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    if (tree_predict(model.trees[t], instance).label == 1) positive += model.vote_weights[t];
    total += model.vote_weights[t];
  }
  return positive / total;
}

int classify(const EnsembleModel& model, std::span<const double> instance,
             std::optional<double> threshold) {
  return ensemble_score(model, instance) >= threshold.value_or(model.threshold) ? 1 : 0;
}

}  // namespace sepsis

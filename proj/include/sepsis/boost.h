#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sepsis/preprocess.h"
#include "sepsis/tree.h"

namespace sepsis {

struct BoostConfig {
  int cycles = 200;
  // Share of minority-class rows in each post-sampling training set.
  double minority_fraction = 0.5;
  std::uint64_t seed = 0;
  TreeParams tree;
  double epsilon_floor = 1e-10;
  int max_resample_retries = 5;

  void validate() const;
  bool operator==(const BoostConfig&) const = default;
};

struct TrainingSummary {
  int cycles_run = 0;
  double minority_fraction = 0.0;
  std::uint64_t seed = 0;
  bool stopped_early = false;

  bool operator==(const TrainingSummary&) const = default;
};

struct EnsembleModel {
  std::vector<DecisionTree> trees;
  std::vector<double> vote_weights;  // ln(1/beta_t)
  double threshold = 0.5;
  PreprocessState preprocessing;
  BoostConfig config;
  TrainingSummary summary;

  std::size_t n_features() const { return trees.empty() ? 0 : trees.front().n_features; }
  // len(trees) == len(vote_weights) >= 1, positive vote weights.
  void validate() const;

  bool operator==(const EnsembleModel&) const = default;
};

// Per-cycle misclassification rate of the ensemble built so far.
using LossCurve = std::vector<double>;

struct CycleTrace {
  int cycle = 0;
  int retries = 0;
  std::size_t sample_size = 0;
  std::size_t sample_minority = 0;
  double epsilon = 0.0;  // after flooring
  double vote_weight = 0.0;
  double weight_sum = 0.0;  // after renormalisation
  double min_weight = 0.0;
};

struct BoostResult {
  EnsembleModel model;
  LossCurve loss_curve;
  std::vector<CycleTrace> trace;
};

// Keeps every positive (minority) row and draws negative rows without
// replacement so the positive share is `minority_fraction`. Returns ascending row indices.
std::vector<std::size_t> rus_sample(std::span<const int> labels,
                                    double minority_fraction,
                                    std::mt19937_64& engine);
std::vector<std::size_t> rus_sample(std::span<const int> labels,
                                    double minority_fraction, std::uint64_t seed);
// As above, but negative rows are drawn with probability proportional to
// their weight (weighted sampling without replacement).
std::vector<std::size_t> rus_sample(std::span<const int> labels,
                                    std::span<const double> weights,
                                    double minority_fraction,
                                    std::mt19937_64& engine);

// RUSBoost: AdaBoost.M1 where each round's tree sees a random undersample
// but the error and the weight update run over every training row.
BoostResult train_rusboost(const InstanceMatrix& data, const BoostConfig& config);

// Normalised weighted vote for class 1, in [0, 1].
double ensemble_score(const EnsembleModel& model, std::span<const double> instance);

// 1 iff score >= threshold (the model's own unless overridden).
int classify(const EnsembleModel& model, std::span<const double> instance,
             std::optional<double> threshold = std::nullopt);

}  // namespace sepsis

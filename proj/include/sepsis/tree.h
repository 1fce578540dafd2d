#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "sepsis/preprocess.h"

namespace sepsis {

struct TreeParams {
  // Maximum number of internal nodes.
  int max_splits = 10;
  // Minimum child weight, in units of the mean row weight of the fit input.
  double min_leaf_weight = 1.0;
  int max_surrogates = 5;
  // 0 means unlimited.
  int max_depth = 0;

  void validate() const;
  bool operator==(const TreeParams&) const = default;
};

enum class Branch { kLeft, kRight };

struct SplitRule {
  std::size_t feature = 0;
  double threshold = 0.0;
  // Branch taking the larger observed weight; used when neither the primary
  // feature nor any surrogate is observed.
  Branch missing_to = Branch::kLeft;
  // Impurity decrease over the rows observing `feature`.
  double gain = 0.0;

  bool operator==(const SplitRule&) const = default;
};

struct SurrogateRule {
  std::size_t feature = 0;
  double threshold = 0.0;
  // true: value <= threshold goes where the primary sends "left".
  bool agrees_with_primary = true;
  double association = 0.0;

  bool operator==(const SurrogateRule&) const = default;
};

struct TreeNode {
  bool is_leaf = true;
  // Weighted fractions of class 0 and class 1 among the fit rows reaching
  // this node.
  std::array<double, 2> class_fractions = {1.0, 0.0};
  int majority_class = 0;
  int depth = 0;
  SplitRule split;
  std::vector<SurrogateRule> surrogates;  // descending association
  int left = -1;
  int right = -1;

  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t n_features = 0;

  const TreeNode& root() const { return nodes.front(); }
  std::size_t split_count() const;
  int depth() const;

  bool operator==(const DecisionTree&) const = default;
};

struct TreePrediction {
  int label = 0;
  double score = 0.0;  // weighted positive fraction of the leaf
};

// 1 - p0^2 - p1^2 over weighted class fractions.
double weighted_gini(std::span<const int> labels, std::span<const double> weights);

// Best (feature, midpoint) split of the given rows. `weights[i]` belongs to
// `rows[i]`; rows may repeat. Ties go to the lowest feature index, then the
// smallest threshold. nullopt when no split has positive gain.
std::optional<SplitRule> find_best_split(const InstanceMatrix& data,
                                         std::span<const std::size_t> rows,
                                         std::span<const double> weights,
                                         const TreeParams& params);

// Surrogates for `primary` ranked by predictive association, only those
// beating the majority-branch guess, truncated to params.max_surrogates.
std::vector<SurrogateRule> find_surrogates(const InstanceMatrix& data,
                                           std::span<const std::size_t> rows,
                                           std::span<const double> weights,
                                           const SplitRule& primary,
                                           const TreeParams& params);

// Primary split if observed, else first observed surrogate, else missing_to.
Branch route(const TreeNode& node, std::span<const double> instance);

// Best-first CART growth on weighted rows.
DecisionTree fit_tree(const InstanceMatrix& data,
                      std::span<const std::size_t> rows,
                      std::span<const double> weights, const TreeParams& params);

TreePrediction tree_predict(const DecisionTree& tree,
                            std::span<const double> instance);

// Index of the leaf `instance` ends in.
std::size_t leaf_index(const DecisionTree& tree, std::span<const double> instance);

// For every node, the rows (values taken from `rows`) that pass through it.
std::vector<std::vector<std::size_t>> node_row_sets(
    const DecisionTree& tree, const InstanceMatrix& data,
    std::span<const std::size_t> rows);

}  // namespace sepsis

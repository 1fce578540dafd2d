#include "sepsis/tree.h"

#include <algorithm>
#include <numeric>

namespace sepsis {

namespace {

// Gains and associations closer than this are ties.
constexpr double kTieTolerance = 1e-12;

double gini_from(double w_neg, double w_pos) {
  const double total = w_neg + w_pos;
  if (total <= 0.0) return 0.0;
  const double p0 = w_neg / total;
  const double p1 = w_pos / total;
  return 1.0 - p0 * p0 - p1 * p1;
}

double midpoint(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid < b ? mid : a;
}

struct Entry {
  double value;
  std::size_t position;
};

// The node's rows observing `feature`, ordered by value then position.
std::vector<Entry> observed_sorted(const InstanceMatrix& data,
                                   std::span<const std::size_t> rows,
                                   std::span<const std::size_t> members,
                                   std::size_t feature) {
  std::vector<Entry> out;
  out.reserve(members.size());
  for (auto pos : members) {
    const double v = data.at(rows[pos], feature);
    if (!is_missing(v)) out.push_back({v, pos});
  }
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    return a.value < b.value || (a.value == b.value && a.position < b.position);
  });
  return out;
}

struct Candidate {
  SplitRule rule;
  double observed_weight = 0.0;
};

std::optional<Candidate> best_split(const InstanceMatrix& data,
                                    std::span<const std::size_t> rows,
                                    std::span<const double> weights,
                                    std::span<const std::size_t> members,
                                    double min_child_weight) {
  // Tolerates summation drift in the mean weight.
  min_child_weight *= 1.0 - 1e-9;
  std::optional<Candidate> best;
  double best_gain = kTieTolerance;  // gains must be positive
  for (std::size_t f = 0; f < data.n_features(); ++f) {
    const auto entries = observed_sorted(data, rows, members, f);
    if (entries.size() < 2) continue;

    double w_neg = 0.0, w_pos = 0.0;
    for (const auto& e : entries)
      (data.labels[rows[e.position]] == 1 ? w_pos : w_neg) += weights[e.position];
    const double total = w_neg + w_pos;
    if (total <= 0.0) continue;
    const double parent = gini_from(w_neg, w_pos);

    double l_neg = 0.0, l_pos = 0.0;
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
      const auto pos = entries[i].position;
      (data.labels[rows[pos]] == 1 ? l_pos : l_neg) += weights[pos];
      if (entries[i].value == entries[i + 1].value) continue;
      const double w_left = l_neg + l_pos;
      const double w_right = total - w_left;
      if (w_left < min_child_weight || w_right < min_child_weight) continue;
      const double gain = parent - (w_left / total) * gini_from(l_neg, l_pos) -
                          (w_right / total) * gini_from(w_neg - l_neg, w_pos - l_pos);
      if (gain > best_gain + (best ? kTieTolerance : 0.0)) {
        best_gain = gain;
        Candidate c;
        c.rule.feature = f;
        c.rule.threshold = midpoint(entries[i].value, entries[i + 1].value);
        c.rule.missing_to = w_left >= w_right ? Branch::kLeft : Branch::kRight;
        c.rule.gain = gain;
        c.observed_weight = total;
        best = c;
      }
    }
  }
  return best;
}

std::vector<SurrogateRule> surrogates_for(const InstanceMatrix& data,
                                          std::span<const std::size_t> rows,
                                          std::span<const double> weights,
                                          std::span<const std::size_t> members,
                                          const SplitRule& primary,
                                          int max_surrogates) {
  std::vector<SurrogateRule> found;
  if (max_surrogates <= 0) return found;

  std::vector<std::size_t> joint;
  for (auto pos : members)
    if (!is_missing(data.at(rows[pos], primary.feature))) joint.push_back(pos);
  for (std::size_t g = 0; g < data.n_features(); ++g) {
    if (g == primary.feature) continue;
    const auto entries = observed_sorted(data, rows, joint, g);
    if (entries.size() < 2) continue;

    auto goes_left = [&](std::size_t pos) {
      return data.at(rows[pos], primary.feature) <= primary.threshold;
    };
    double p_left = 0.0, p_right = 0.0;
    for (const auto& e : entries)
      (goes_left(e.position) ? p_left : p_right) += weights[e.position];
    const double total = p_left + p_right;
    if (total <= 0.0) continue;
    const double majority = std::max(p_left, p_right) / total;
    if (majority >= 1.0) continue;

    double l_left = 0.0, l_right = 0.0;  // primary-left/right weight in "<= t"
    double best_agreement = -1.0;
    SurrogateRule best;
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
      const auto pos = entries[i].position;
      (goes_left(pos) ? l_left : l_right) += weights[pos];
      if (entries[i].value == entries[i + 1].value) continue;
      const double agree = (l_left + (p_right - l_right)) / total;
      const double disagree = (l_right + (p_left - l_left)) / total;
      const double threshold = midpoint(entries[i].value, entries[i + 1].value);
      if (agree > best_agreement + kTieTolerance) {
        best_agreement = agree;
        best = {g, threshold, true, 0.0};
      }
      if (disagree > best_agreement + kTieTolerance) {
        best_agreement = disagree;
        best = {g, threshold, false, 0.0};
      }
    }
    if (best_agreement < 0.0) continue;
    best.association = (best_agreement - majority) / (1.0 - majority);
    if (best.association > kTieTolerance) found.push_back(best);
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const SurrogateRule& a, const SurrogateRule& b) {
                     return a.association > b.association;
                   });
  if (found.size() > static_cast<std::size_t>(max_surrogates))
    found.resize(static_cast<std::size_t>(max_surrogates));
  return found;
}

void set_class_fractions(TreeNode& node, const InstanceMatrix& data,
                         std::span<const std::size_t> rows,
                         std::span<const double> weights,
                         std::span<const std::size_t> members) {
  double w_neg = 0.0, w_pos = 0.0;
  for (auto pos : members)
    (data.labels[rows[pos]] == 1 ? w_pos : w_neg) += weights[pos];
  if (w_neg + w_pos <= 0.0) {
    // zero-weight node: fall back to counts
    for (auto pos : members) (data.labels[rows[pos]] == 1 ? w_pos : w_neg) += 1.0;
  }
  const double total = w_neg + w_pos;
  node.class_fractions = total > 0.0
                             ? std::array<double, 2>{w_neg / total, w_pos / total}
                             : std::array<double, 2>{1.0, 0.0};
  node.majority_class = node.class_fractions[1] > node.class_fractions[0] ? 1 : 0;
}

bool is_pure(const InstanceMatrix& data, std::span<const std::size_t> rows,
             std::span<const std::size_t> members) {
  for (auto pos : members)
    if (data.labels[rows[pos]] != data.labels[rows[members.front()]]) return false;
  return true;
}

void check_fit_input(const InstanceMatrix& data, std::span<const std::size_t> rows,
                     std::span<const double> weights) {
  if (rows.empty()) throw ArgumentError("cannot fit a tree on zero rows");
  if (rows.size() != weights.size())
    throw ArgumentError("rows and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= data.rows()) throw ArgumentError("row index out of range");
    if (!(weights[i] >= 0.0)) throw ArgumentError("weights must be non-negative");
    total += weights[i];
  }
  if (!(total > 0.0)) throw ArgumentError("total weight must be positive");
}

double row_equivalent(std::span<const double> weights) {
  return std::accumulate(weights.begin(), weights.end(), 0.0) /
         static_cast<double>(weights.size());
}

std::vector<std::size_t> all_positions(std::size_t n) {
  std::vector<std::size_t> members(n);
  std::iota(members.begin(), members.end(), std::size_t{0});
  return members;
}

}  // namespace

void TreeParams::validate() const {
  if (max_splits < 1) throw ConfigError("tree.max_splits must be >= 1");
  if (max_surrogates < 0) throw ConfigError("tree.max_surrogates must be >= 0");
  if (!(min_leaf_weight >= 0.0))
    throw ConfigError("tree.min_leaf_weight must be >= 0");
  if (max_depth < 0) throw ConfigError("tree.max_depth must be >= 0");
}

std::size_t DecisionTree::split_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf; }));
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes)
    if (n.is_leaf) d = std::max(d, n.depth);
  return d;
}

double weighted_gini(std::span<const int> labels, std::span<const double> weights) {
  if (labels.size() != weights.size())
    throw ArgumentError("labels and weights differ in length");
  double w_neg = 0.0, w_pos = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == 1 ? w_pos : w_neg) += weights[i];
  if (!(w_neg + w_pos > 0.0)) throw ArgumentError("total weight must be positive");
  return gini_from(w_neg, w_pos);
}

std::optional<SplitRule> find_best_split(const InstanceMatrix& data,
                                         std::span<const std::size_t> rows,
                                         std::span<const double> weights,
                                         const TreeParams& params) {
  check_fit_input(data, rows, weights);
  const auto members = all_positions(rows.size());
  const auto c = best_split(data, rows, weights, members,
                            params.min_leaf_weight * row_equivalent(weights));
  if (!c) return std::nullopt;
  return c->rule;
}

std::vector<SurrogateRule> find_surrogates(const InstanceMatrix& data,
                                           std::span<const std::size_t> rows,
                                           std::span<const double> weights,
                                           const SplitRule& primary,
                                           const TreeParams& params) {
  check_fit_input(data, rows, weights);
  if (primary.feature >= data.n_features())
    throw ArgumentError("primary split feature out of range");
  return surrogates_for(data, rows, weights, all_positions(rows.size()), primary,
                        params.max_surrogates);
}

Branch route(const TreeNode& node, std::span<const double> instance) {
  const double v = instance[node.split.feature];
  if (!is_missing(v))
    return v <= node.split.threshold ? Branch::kLeft : Branch::kRight;
  for (const auto& s : node.surrogates) {
    const double u = instance[s.feature];
    if (is_missing(u)) continue;
    const bool low = u <= s.threshold;
    return low == s.agrees_with_primary ? Branch::kLeft : Branch::kRight;
  }
  return node.split.missing_to;
}

DecisionTree fit_tree(const InstanceMatrix& data, std::span<const std::size_t> rows,
                      std::span<const double> weights, const TreeParams& params) {
  params.validate();
  check_fit_input(data, rows, weights);
  const double min_child = params.min_leaf_weight * row_equivalent(weights);

  DecisionTree tree;
  tree.n_features = data.n_features();
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::optional<Candidate>> pending;

  auto add_node = [&](std::vector<std::size_t> node_members, int depth) {
    TreeNode node;
    node.depth = depth;
    set_class_fractions(node, data, rows, weights, node_members);
    std::optional<Candidate> cand;
    const bool depth_ok = params.max_depth == 0 || depth < params.max_depth;
    if (depth_ok && node_members.size() >= 2 && !is_pure(data, rows, node_members))
      cand = best_split(data, rows, weights, node_members, min_child);
    tree.nodes.push_back(std::move(node));
    members.push_back(std::move(node_members));
    pending.push_back(cand);
  };

  add_node(all_positions(rows.size()), 0);

  for (int splits = 0; splits < params.max_splits; ++splits) {
    // best-first: largest total impurity decrease, lowest node id on ties
    std::optional<std::size_t> pick;
    double best_priority = 0.0;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (!pending[i]) continue;
      const double priority = pending[i]->rule.gain * pending[i]->observed_weight;
      if (!pick || priority > best_priority * (1.0 + kTieTolerance)) {
        pick = i;
        best_priority = priority;
      }
    }
    if (!pick) break;

    const std::size_t id = *pick;
    const SplitRule rule = pending[id]->rule;
    pending[id].reset();

    TreeNode& node = tree.nodes[id];
    node.is_leaf = false;
    node.split = rule;
    node.surrogates = surrogates_for(data, rows, weights, members[id], rule,
                                     params.max_surrogates);

    std::vector<std::size_t> left, right;
    for (auto pos : members[id])
      (route(node, data.row(rows[pos])) == Branch::kLeft ? left : right).push_back(pos);
    members[id].clear();
    members[id].shrink_to_fit();

    const int depth = node.depth + 1;
    const int left_id = static_cast<int>(tree.nodes.size());
    add_node(std::move(left), depth);
    add_node(std::move(right), depth);
    tree.nodes[id].left = left_id;
    tree.nodes[id].right = left_id + 1;
  }
  return tree;
}

std::size_t leaf_index(const DecisionTree& tree, std::span<const double> instance) {
  if (instance.size() != tree.n_features)
    throw ArgumentError("instance has " + std::to_string(instance.size()) +
                        " features, tree expects " + std::to_string(tree.n_features));
  std::size_t id = 0;
  while (!tree.nodes[id].is_leaf) {
    const auto& node = tree.nodes[id];
    id = static_cast<std::size_t>(route(node, instance) == Branch::kLeft ? node.left
                                                                       : node.right);
  }
  return id;
}

TreePrediction tree_predict(const DecisionTree& tree, std::span<const double> instance) {
  const auto& leaf = tree.nodes[leaf_index(tree, instance)];
  return {leaf.majority_class, leaf.class_fractions[1]};
}

std::vector<std::vector<std::size_t>> node_row_sets(const DecisionTree& tree,
                                                    const InstanceMatrix& data,
                                                    std::span<const std::size_t> rows) {
  std::vector<std::vector<std::size_t>> sets(tree.nodes.size());
  for (auto r : rows) {
    const auto instance = data.row(r);
    std::size_t id = 0;
    sets[id].push_back(r);
    while (!tree.nodes[id].is_leaf) {
      const auto& node = tree.nodes[id];
      id = static_cast<std::size_t>(route(node, instance) == Branch::kLeft ? node.left
                                                                         : node.right);
      sets[id].push_back(r);
    }
  }
  return sets;
}

}  // namespace sepsis

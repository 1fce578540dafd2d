#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.h"
#include "sepsis/tree.h"

namespace sepsis {
namespace {

const double M = kMissing;

std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

std::vector<double> uniform(std::size_t n) { return std::vector<double>(n, 1.0 / double(n)); }

TEST(WeightedGini, Examples) {
  EXPECT_DOUBLE_EQ(weighted_gini(std::vector<int>{1, 1, 0, 0}, uniform(4)), 0.5);
  EXPECT_DOUBLE_EQ(weighted_gini(std::vector<int>{1, 1, 1}, uniform(3)), 0.0);
  EXPECT_DOUBLE_EQ(weighted_gini(std::vector<int>{1, 0}, std::vector<double>{0.75, 0.25}), 0.375);
}

TEST(WeightedGini, ZeroWeightIsRejected) {
  EXPECT_THROW(weighted_gini(std::vector<int>{1, 0}, std::vector<double>{0, 0}), ArgumentError);
}

TEST(FindBestSplit, FourPointExample) {
  const auto m = InstanceMatrix::from_rows({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
  const auto s = find_best_split(m, iota_rows(4), uniform(4), {});
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
  EXPECT_DOUBLE_EQ(s->threshold, 2.5);
  EXPECT_DOUBLE_EQ(s->gain, 0.5);
  const auto brute = oracle::best_split({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(brute->threshold, 2.5);
  EXPECT_DOUBLE_EQ(brute->gain, 0.5);
}

TEST(FindBestSplit, PureNodeHasNoSplit) {
  const auto m = InstanceMatrix::from_rows({{1}, {2}, {3}}, {1, 1, 1});
  EXPECT_FALSE(find_best_split(m, iota_rows(3), uniform(3), {}));
}

TEST(FindBestSplit, ConstantFeatureContributesNothing) {
  const auto m = InstanceMatrix::from_rows({{5, 1}, {5, 2}, {5, 3}, {5, 4}}, {0, 0, 1, 1});
  const auto s = find_best_split(m, iota_rows(4), uniform(4), {});
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 1u);
  const auto only_constant = InstanceMatrix::from_rows({{5}, {5}, {5}}, {0, 1, 0});
  EXPECT_FALSE(find_best_split(only_constant, iota_rows(3), uniform(3), {}));
}

TEST(FindBestSplit, MissingRowsAreExcludedFromGain) {
  // f0 separates its observed rows perfectly; f1 separates all rows but less cleanly.
  const auto m = InstanceMatrix::from_rows(
      {{1, 1}, {2, 2}, {M, 4}, {M, 3}, {8, 5}, {9, 6}}, {0, 0, 0, 1, 1, 1});
  const auto s = find_best_split(m, iota_rows(6), uniform(6), {});
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
  EXPECT_DOUBLE_EQ(s->threshold, 5.0);
  EXPECT_DOUBLE_EQ(s->gain, 0.5);
}

TEST(FindBestSplit, TiesGoToLowestFeatureThenSmallestThreshold) {
  const auto m = InstanceMatrix::from_rows({{1, 1}, {2, 2}, {3, 3}, {4, 4}}, {0, 0, 1, 1});
  const auto s = find_best_split(m, iota_rows(4), uniform(4), {});
  EXPECT_EQ(s->feature, 0u);
  // labels 0 1 0 1: thresholds 1.5 and 3.5 tie
  const auto t = InstanceMatrix::from_rows({{1}, {2}, {3}, {4}}, {1, 0, 0, 1});
  const auto u = find_best_split(t, iota_rows(4), uniform(4), {});
  ASSERT_TRUE(u);
  EXPECT_DOUBLE_EQ(u->threshold, 1.5);
}

TEST(FindBestSplit, MissingToFollowsLargerObservedSide) {
  const auto m = InstanceMatrix::from_rows({{1}, {2}, {3}, {4}, {5}}, {0, 0, 0, 1, 1});
  const auto s = find_best_split(m, iota_rows(5), uniform(5), {});
  EXPECT_DOUBLE_EQ(s->threshold, 3.5);
  EXPECT_EQ(s->missing_to, Branch::kLeft);
  const auto n = InstanceMatrix::from_rows({{1}, {2}, {3}, {4}, {5}}, {0, 0, 1, 1, 1});
  EXPECT_EQ(find_best_split(n, iota_rows(5), uniform(5), {})->missing_to, Branch::kRight);
}

TEST(FindBestSplitOracle, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 60, d = 1 + rng() % 5;
    std::uniform_int_distribution<int> small(0, 6);
    std::vector<std::vector<double>> x(n, std::vector<double>(d));
    std::vector<int> y(n);
    for (auto& row : x)
      for (auto& v : row) v = small(rng);
    for (auto& v : y) v = static_cast<int>(rng() % 2);
    const auto m = InstanceMatrix::from_rows(x, y);
    const auto got = find_best_split(m, iota_rows(n), uniform(n), {});
    const auto want = oracle::best_split(x, y);
    ASSERT_EQ(got.has_value(), want.has_value()) << "trial " << trial;
    if (!got) continue;
    EXPECT_EQ(got->feature, want->feature) << "trial " << trial;
    EXPECT_DOUBLE_EQ(got->threshold, want->threshold) << "trial " << trial;
    EXPECT_NEAR(got->gain, want->gain, 1e-12);
  }
}

TEST(FindSurrogates, IdenticalFeatureIsPerfect) {
  const auto m = InstanceMatrix::from_rows({{1, 10}, {2, 20}, {3, 30}, {4, 40}}, {0, 0, 1, 1});
  const auto primary = *find_best_split(m, iota_rows(4), uniform(4), {});
  const auto s = find_surrogates(m, iota_rows(4), uniform(4), primary, {});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].feature, 1u);
  EXPECT_DOUBLE_EQ(s[0].association, 1.0);
  EXPECT_TRUE(s[0].agrees_with_primary);
  EXPECT_DOUBLE_EQ(s[0].threshold, 25.0);
}

TEST(FindSurrogates, ReversedFeatureDisagrees) {
  const auto m = InstanceMatrix::from_rows({{1, 4}, {2, 3}, {3, 2}, {4, 1}}, {0, 0, 1, 1});
  const auto primary = *find_best_split(m, iota_rows(4), uniform(4), {});
  const auto s = find_surrogates(m, iota_rows(4), uniform(4), primary, {});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_FALSE(s[0].agrees_with_primary);
  EXPECT_DOUBLE_EQ(s[0].association, 1.0);
}

// Best agreement over every threshold and orientation of one feature,
// counted row by row.
double brute_agreement(const std::vector<double>& g, const std::vector<bool>& primary_left) {
  std::vector<double> v(g.begin(), g.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double thr = (v[i] + v[i + 1]) / 2;
    int same = 0, flipped = 0;
    for (std::size_t r = 0; r < g.size(); ++r) {
      same += (g[r] <= thr) == primary_left[r];
      flipped += (g[r] <= thr) != primary_left[r];
    }
    best = std::max({best, same / double(g.size()), flipped / double(g.size())});
  }
  return best;
}

TEST(FindSurrogates, NoBetterThanMajorityIsDiscarded) {
  // primary sends rows 0..6 left (majority 0.7); f1 matches at most 6 of 10
  const std::vector<double> f0{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<double> f1{1, 9, 2, 8, 3, 7, 4, 6, 5, 5};
  const std::vector<int> y{0, 0, 0, 0, 0, 0, 0, 1, 1, 1};
  std::vector<std::vector<double>> x;
  for (int i = 0; i < 10; ++i) x.push_back({f0[i], f1[i]});
  const auto m = InstanceMatrix::from_rows(x, y);
  const auto primary = *find_best_split(m, iota_rows(10), uniform(10), {});
  ASSERT_DOUBLE_EQ(primary.threshold, 7.5);

  std::vector<bool> left;
  for (double v : f0) left.push_back(v <= primary.threshold);
  const double agreement = brute_agreement(f1, left);
  const double lambda = (agreement - 0.7) / (1 - 0.7);
  EXPECT_LE(lambda, 1e-12);
  EXPECT_TRUE(find_surrogates(m, iota_rows(10), uniform(10), primary, {}).empty());
}

TEST(FindSurrogates, AssociationMatchesBruteForce) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> small(0, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 6 + rng() % 30;
    std::vector<std::vector<double>> x(n, std::vector<double>(3));
    std::vector<int> y(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (auto& v : x[r]) v = small(rng);
      y[r] = x[r][0] + small(rng) > 5 ? 1 : 0;
    }
    const auto m = InstanceMatrix::from_rows(x, y);
    const auto primary = find_best_split(m, iota_rows(n), uniform(n), {});
    if (!primary) continue;
    std::vector<bool> left;
    for (std::size_t r = 0; r < n; ++r) left.push_back(x[r][primary->feature] <= primary->threshold);
    const double n_left = std::count(left.begin(), left.end(), true);
    const double majority = std::max(n_left, n - n_left) / n;
    const auto sur = find_surrogates(m, iota_rows(n), uniform(n), *primary, {});
    for (std::size_t g = 0; g < 3; ++g) {
      if (g == primary->feature) continue;
      std::vector<double> col;
      for (const auto& row : x) col.push_back(row[g]);
      const double lambda = majority >= 1.0 ? 0.0 : (brute_agreement(col, left) - majority) / (1 - majority);
      const auto it = std::find_if(sur.begin(), sur.end(),
                                   [&](const SurrogateRule& s) { return s.feature == g; });
      if (lambda > 1e-9) {
        ASSERT_NE(it, sur.end()) << "trial " << trial;
        EXPECT_NEAR(it->association, lambda, 1e-12);
      } else if (lambda < -1e-9) {
        EXPECT_EQ(it, sur.end());
      }
    }
    for (std::size_t i = 1; i < sur.size(); ++i)
      EXPECT_GE(sur[i - 1].association, sur[i].association);
  }
}

TEST(FindSurrogates, MaxSurrogatesZeroGivesEmptyList) {
  const auto m = InstanceMatrix::from_rows({{1, 10}, {2, 20}, {3, 30}, {4, 40}}, {0, 0, 1, 1});
  TreeParams p;
  p.max_surrogates = 0;
  const auto primary = *find_best_split(m, iota_rows(4), uniform(4), p);
  EXPECT_TRUE(find_surrogates(m, iota_rows(4), uniform(4), primary, p).empty());
}

TreeNode internal_node() {
  TreeNode n;
  n.is_leaf = false;
  n.split = {0, 5.0, Branch::kRight, 0.1};
  n.surrogates = {{1, 2.0, true, 0.8}, {2, 7.0, false, 0.5}};
  return n;
}

TEST(Route, PrimaryDecidesWhenObserved) {
  const auto n = internal_node();
  EXPECT_EQ(route(n, std::vector<double>{5.0, 9, 9}), Branch::kLeft);
  EXPECT_EQ(route(n, std::vector<double>{5.1, 0, 0}), Branch::kRight);
}

TEST(Route, FirstObservedSurrogateDecides) {
  const auto n = internal_node();
  EXPECT_EQ(route(n, std::vector<double>{M, 1.0, 100}), Branch::kLeft);
  EXPECT_EQ(route(n, std::vector<double>{M, 3.0, 0}), Branch::kRight);
  // second surrogate is reversed: low values go right
  EXPECT_EQ(route(n, std::vector<double>{M, M, 1.0}), Branch::kRight);
  EXPECT_EQ(route(n, std::vector<double>{M, M, 9.0}), Branch::kLeft);
}

TEST(Route, AllMissingFallsBackToMajorityBranch) {
  EXPECT_EQ(route(internal_node(), std::vector<double>{M, M, M}), Branch::kRight);
}

TEST(FitTree, SeparableDataGivesOneSplitAndZeroError) {
  const auto m = InstanceMatrix::from_rows({{1}, {2}, {3}, {10}, {11}}, {0, 0, 0, 1, 1});
  const auto t = fit_tree(m, iota_rows(5), uniform(5), {});
  EXPECT_EQ(t.split_count(), 1u);
  EXPECT_EQ(t.depth(), 1);
  EXPECT_DOUBLE_EQ(t.root().split.threshold, 6.5);
  for (std::size_t r = 0; r < 5; ++r) EXPECT_EQ(tree_predict(t, m.row(r)).label, m.labels[r]);
}

TEST(FitTree, IdenticalRowsGiveMajorityLeaf) {
  const auto m = InstanceMatrix::from_rows({{1, 1}, {1, 1}, {1, 1}}, {1, 0, 1});
  const auto t = fit_tree(m, iota_rows(3), uniform(3), {});
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.root().majority_class, 1);
  EXPECT_NEAR(t.root().class_fractions[1], 2.0 / 3.0, 1e-15);
}

TEST(FitTree, MaxSplitsOneIsAStump) {
  std::mt19937_64 rng(2);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) {
    x.push_back({double(rng() % 100), double(rng() % 100)});
    y.push_back(static_cast<int>(rng() % 2));
  }
  TreeParams p;
  p.max_splits = 1;
  const auto t = fit_tree(InstanceMatrix::from_rows(x, y), iota_rows(50), uniform(50), p);
  EXPECT_EQ(t.split_count(), 1u);
  EXPECT_EQ(t.nodes.size(), 3u);
}

TEST(FitTree, RespectsMaxSplitsAndDepth) {
  std::mt19937_64 rng(6);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    x.push_back({double(rng() % 1000), double(rng() % 1000), double(rng() % 1000)});
    y.push_back(static_cast<int>(rng() % 2));
  }
  const auto m = InstanceMatrix::from_rows(x, y);
  TreeParams p;
  const auto t = fit_tree(m, iota_rows(200), uniform(200), p);
  EXPECT_EQ(t.split_count(), 10u);
  p.max_depth = 2;
  p.max_splits = 100;
  const auto shallow = fit_tree(m, iota_rows(200), uniform(200), p);
  EXPECT_LE(shallow.depth(), 2);
  EXPECT_LE(shallow.split_count(), 3u);
}

TEST(FitTree, EmptyInputIsRejected) {
  const auto m = InstanceMatrix::from_rows({{1}}, {0});
  EXPECT_THROW(fit_tree(m, std::vector<std::size_t>{}, std::vector<double>{}, {}), ArgumentError);
}

TEST(TreePredict, SingleLeafScoresItsPositiveFraction) {
  DecisionTree t;
  t.n_features = 2;
  TreeNode leaf;
  leaf.class_fractions = {0.2, 0.8};
  leaf.majority_class = 1;
  t.nodes.push_back(leaf);
  const auto p = tree_predict(t, std::vector<double>{M, M});
  EXPECT_EQ(p.label, 1);
  EXPECT_DOUBLE_EQ(p.score, 0.8);
  EXPECT_THROW(tree_predict(t, std::vector<double>{1.0}), ArgumentError);
}

InstanceMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d, double missing) {
  std::uniform_real_distribution<double> v(0.0, 50.0);
  std::bernoulli_distribution miss(missing);
  std::vector<std::vector<double>> x(n, std::vector<double>(d));
  std::vector<int> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (auto& val : x[r]) val = miss(rng) ? M : std::round(v(rng));
    y[r] = (x[r][0] > 25 || rng() % 5 == 0) ? 1 : 0;
  }
  return InstanceMatrix::from_rows(x, y);
}

TEST(FitTreeProperty, EveryInstanceReachesExactlyOneLeaf) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_matrix(rng, 80, 4, 0.5);
    const auto t = fit_tree(m, iota_rows(80), uniform(80), {});
    const auto sets = node_row_sets(t, m, iota_rows(80));
    std::size_t in_leaves = 0;
    for (std::size_t i = 0; i < t.nodes.size(); ++i)
      if (t.nodes[i].is_leaf) in_leaves += sets[i].size();
    EXPECT_EQ(in_leaves, 80u);
    const std::vector<double> empty(4, M);
    EXPECT_TRUE(t.nodes[leaf_index(t, empty)].is_leaf);
  }
}

TEST(FitTreeProperty, DuplicatingARowEqualsDoublingItsWeight) {
  std::mt19937_64 rng(10);
  TreeParams p;
  p.min_leaf_weight = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_matrix(rng, 40, 3, 0.3);
    const std::size_t dup = rng() % 40;
    std::vector<std::size_t> rows = iota_rows(40);
    std::vector<double> doubled(40, 1.0);
    doubled[dup] = 2.0;
    rows.push_back(dup);
    const std::vector<double> ones(41, 1.0);
    const auto a = fit_tree(m, iota_rows(40), doubled, p);
    const auto b = fit_tree(m, rows, ones, p);
    ASSERT_EQ(a.nodes.size(), b.nodes.size()) << "trial " << trial;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
      EXPECT_EQ(a.nodes[i].is_leaf, b.nodes[i].is_leaf);
      EXPECT_EQ(a.nodes[i].split.feature, b.nodes[i].split.feature);
      EXPECT_DOUBLE_EQ(a.nodes[i].split.threshold, b.nodes[i].split.threshold);
      EXPECT_EQ(a.nodes[i].split.missing_to, b.nodes[i].split.missing_to);
      EXPECT_NEAR(a.nodes[i].class_fractions[1], b.nodes[i].class_fractions[1], 1e-12);
      ASSERT_EQ(a.nodes[i].surrogates.size(), b.nodes[i].surrogates.size());
    }
  }
}

TEST(FitTreeProperty, SquaringAFeatureKeepsPartitions) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_matrix(rng, 100, 4, 0.0);
    auto sq = m;
    const std::size_t f = rng() % 4;
    for (std::size_t r = 0; r < sq.rows(); ++r) sq.at(r, f) *= sq.at(r, f);
    const auto a = fit_tree(m, iota_rows(100), uniform(100), {});
    const auto b = fit_tree(sq, iota_rows(100), uniform(100), {});
    EXPECT_EQ(node_row_sets(a, m, iota_rows(100)), node_row_sets(b, sq, iota_rows(100)));
  }
}

}  // namespace
}  // namespace sepsis

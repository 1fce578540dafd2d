#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.h"
#include "sepsis/metrics.h"

namespace sepsis {
namespace {

TEST(Confusion, Examples) {
  EXPECT_EQ(confusion(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 1, 0, 0}),
            (ConfusionCounts{2, 0, 0, 2}));
  EXPECT_EQ(confusion(std::vector<int>{0, 0}, std::vector<int>{1, 0}), (ConfusionCounts{0, 0, 1, 1}));
  EXPECT_EQ(confusion(std::vector<int>{1, 1, 1}, std::vector<int>{0, 0, 0}).fp, 3u);
  EXPECT_THROW(confusion(std::vector<int>{1}, std::vector<int>{1, 0}), ArgumentError);
}

TEST(AccuracyF, Examples) {
  auto a = accuracy_f_measure({1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(a.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(a.f_measure, 0.5);
  a = accuracy_f_measure({3, 0, 0, 5});
  EXPECT_DOUBLE_EQ(a.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(a.f_measure, 1.0);
  a = accuracy_f_measure({0, 0, 0, 7});
  EXPECT_DOUBLE_EQ(a.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(a.f_measure, 0.0);
  EXPECT_THROW(accuracy_f_measure({}), ArgumentError);
}

TEST(Auroc, Examples) {
  const std::vector<double> s{0.9, 0.8, 0.2, 0.1};
  EXPECT_DOUBLE_EQ(auroc(s, std::vector<int>{1, 1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(auroc(s, std::vector<int>{0, 0, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>(4, 0.3), std::vector<int>{1, 0, 1, 0}), 0.5);
  EXPECT_THROW(auroc(s, std::vector<int>{1, 1, 1, 1}), UndefinedMetricError);
}

TEST(Auprc, Examples) {
  EXPECT_DOUBLE_EQ(auprc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(auprc(std::vector<double>(4, 0.5), std::vector<int>{1, 0, 0, 0}), 0.25);
  // thresholds 0.9: P=1 R=1/2; 0.8: no recall gain; 0.7: P=2/3 R=1
  EXPECT_NEAR(auprc(std::vector<double>{0.9, 0.8, 0.7}, std::vector<int>{1, 0, 1}), 5.0 / 6.0, 1e-15);
  EXPECT_THROW(auprc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}), UndefinedMetricError);
}

TEST(RankingProperty, AurocAndAuprcMatchQuadraticOracles) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (auto& v : s) v = double(rng() % 10) / 10.0;  // many ties
    for (auto& v : y) v = static_cast<int>(rng() % 2);
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auroc(s, y), oracle::auroc(s, y), 1e-12);
    EXPECT_NEAR(auprc(s, y), oracle::auprc(s, y), 1e-12);
  }
}

TEST(RankingProperty, AurocInvariantUnderMonotoneTransformAndComplementsNegation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 50;
    std::vector<double> s(n), t(n), neg(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = u(rng);
      t[i] = std::exp(3 * s[i]) + 7;
      neg[i] = -s[i];
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auroc(s, y), auroc(t, y), 1e-12);
    EXPECT_NEAR(auroc(s, y) + auroc(neg, y), 1.0, 1e-12);
  }
}

const UtilityConfig kCfg;

TEST(UtilityPatient, NonSepticExamples) {
  const std::vector<int> labels(10, 0);
  EXPECT_DOUBLE_EQ(utility_patient(std::vector<int>(10, 0), labels, kCfg), 0.0);
  std::vector<int> one(10, 0);
  one[4] = 1;
  EXPECT_DOUBLE_EQ(utility_patient(one, labels, kCfg), -0.05);
}

// 30 hours, first positive label at hour 20 so onset is hour 26.
std::vector<int> septic_labels() {
  std::vector<int> y(30, 0);
  for (int t = 20; t < 30; ++t) y[t] = 1;
  return y;
}

std::vector<int> only_hour(int t, std::size_t n = 30) {
  std::vector<int> p(n, 0);
  p[t] = 1;
  return p;
}

TEST(UtilityPatient, SepticRampPeakAndMidpoint) {
  const auto y = septic_labels();
  const double inaction = utility_patient(std::vector<int>(30, 0), y, kCfg);
  // hour 20 = onset - 6 (peak), hour 17 = onset - 9 (halfway up the ramp)
  EXPECT_DOUBLE_EQ(utility_patient(only_hour(20), y, kCfg) - inaction, 1.0);
  EXPECT_DOUBLE_EQ(utility_patient(only_hour(17), y, kCfg) - inaction, 0.5);
  EXPECT_NEAR(utility_patient(only_hour(5), y, kCfg) - inaction, -0.05, 1e-12);
}

TEST(UtilityPatient, MissedSepsisIsPenalised) {
  const auto y = septic_labels();
  // hours 21..29: ramp down to -2 over hours 21..29 (onset+3 = 29)
  double expected = 0.0;
  for (int t = 21; t <= 29; ++t) expected += -2.0 * (t - 20) / 9.0;
  EXPECT_NEAR(utility_patient(std::vector<int>(30, 0), y, kCfg), expected, 1e-12);
}

TEST(UtilityPatient, AfterWindowPenaltyFollowsConfig) {
  std::vector<int> y(40, 0);
  for (int t = 10; t < 40; ++t) y[t] = 1;  // onset 16, late bound 19
  const std::vector<int> zeros(40, 0);
  UtilityConfig scorer = kCfg;
  scorer.penalize_after_window = false;
  const double with = utility_patient(zeros, y, kCfg);
  const double without = utility_patient(zeros, y, scorer);
  EXPECT_NEAR(with - without, 20 * -2.0, 1e-12);  // hours 20..39
}

TEST(UtilityPatient, LengthMismatchIsRejected) {
  EXPECT_THROW(utility_patient(std::vector<int>{0}, std::vector<int>{0, 0}, kCfg), ArgumentError);
}

TEST(UtilityNormalized, InactionIsZeroAndOptimalIsOne) {
  const PatientLabels labels{septic_labels(), std::vector<int>(12, 0)};
  const PatientLabels zeros{std::vector<int>(30, 0), std::vector<int>(12, 0)};
  EXPECT_DOUBLE_EQ(utility_normalized(zeros, labels, kCfg), 0.0);
  const PatientLabels best{optimal_predictions(labels[0], kCfg), optimal_predictions(labels[1], kCfg)};
  EXPECT_DOUBLE_EQ(utility_normalized(best, labels, kCfg), 1.0);
}

TEST(UtilityNormalized, DegenerateCohortIsUndefined) {
  const PatientLabels labels{std::vector<int>(5, 0)};
  EXPECT_THROW(utility_normalized(labels, labels, kCfg), UndefinedMetricError);
}

TEST(UtilityNormalized, ThreePatientToyMatchesOracle) {
  const PatientLabels labels{septic_labels(), std::vector<int>(8, 0), {0, 0, 1, 1}};
  const PatientLabels preds{only_hour(18), {0, 1, 0, 0, 0, 0, 1, 0}, {1, 1, 1, 0}};
  EXPECT_NEAR(utility_normalized(preds, labels, kCfg),
              oracle::normalized_utility(preds, labels, kCfg), 1e-12);
}

TEST(UtilityProperty, MatchesPerHourOracleOnRandomCohorts) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto labels = oracle::random_labels(rng, 20, 50);
    const auto preds = oracle::random_predictions(rng, labels);
    for (std::size_t p = 0; p < labels.size(); ++p)
      ASSERT_NEAR(utility_patient(preds[p], labels[p], kCfg),
                  oracle::patient_utility(preds[p], labels[p], kCfg), 1e-9);
    const auto totals = utility_totals(preds, labels, kCfg);
    if (totals.optimal > totals.inaction) {
      const double got = totals.normalized();
      EXPECT_NEAR(got, oracle::normalized_utility(preds, labels, kCfg), 1e-9);
      EXPECT_LE(got, 1.0 + 1e-12);
    }
  }
}

TEST(UtilityProperty, ExtraAlarmEffects) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 20 + static_cast<int>(rng() % 20);
    const int first = 12 + static_cast<int>(rng() % (n - 12));
    std::vector<int> y(n, 0);
    for (int t = first; t < n; ++t) y[t] = 1;
    std::vector<int> p(n, 0);
    for (auto& v : p) v = rng() % 4 == 0;
    // reward window: onset-12 .. onset+3, onset = first + 6
    for (int t = std::max(0, first - 6); t <= std::min(n - 1, first + 9); ++t) {
      if (p[t]) continue;
      auto q = p;
      q[t] = 1;
      EXPECT_GE(utility_patient(q, y, kCfg), utility_patient(p, y, kCfg) - 1e-12);
    }
    std::vector<int> healthy(n, 0);
    auto alarms = p;
    const int t = static_cast<int>(rng() % n);
    alarms[t] = 0;
    auto more = alarms;
    more[t] = 1;
    EXPECT_NEAR(utility_patient(alarms, healthy, kCfg) - utility_patient(more, healthy, kCfg),
                0.05, 1e-12);
  }
}

TEST(Evaluate, ReportsEveryMetric) {
  const PatientLabels labels{septic_labels(), std::vector<int>(10, 0)};
  std::vector<std::vector<double>> scores;
  PatientLabels preds;
  for (const auto& y : labels) {
    std::vector<double> s;
    for (int v : y) s.push_back(v ? 0.9 : 0.1);
    scores.push_back(s);
    preds.push_back(y);
  }
  const auto r = evaluate(scores, preds, labels, kCfg);
  EXPECT_EQ(r.patients, 2u);
  EXPECT_DOUBLE_EQ(*r.auroc, 1.0);
  EXPECT_DOUBLE_EQ(*r.auprc, 1.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.f_measure, 1.0);
  EXPECT_EQ(r.confusion.tp, 10u);
  // perfect labels are not utility-optimal: early alarms before the first label earn more
  EXPECT_NEAR(*r.utility, oracle::normalized_utility(preds, labels, kCfg), 1e-12);
  EXPECT_LT(*r.utility, 1.0);
}

TEST(Evaluate, SingleClassLeavesRankingMetricsUndefined) {
  const PatientLabels labels{std::vector<int>(4, 0)};
  const auto r = evaluate({std::vector<double>(4, 0.2)}, labels, labels, kCfg);
  EXPECT_FALSE(r.auroc);
  EXPECT_FALSE(r.auprc);
  EXPECT_FALSE(r.utility);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
}

TEST(UtilityConfig, InvalidOrderingIsRejected) {
  UtilityConfig c;
  c.dt_optimal = -20;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.min_u_fn = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace sepsis

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dementia/fusion/fusion.hpp"
#include "dementia/metrics/metrics.hpp"
#include "dementia/nn/rng.hpp"
#include "support/oracles.hpp"

using namespace dementia;
using fusion::Outcome;

TEST(Fusion, AllFourRules) {
  EXPECT_EQ(fusion::fuse({1, 1}).outcome, Outcome::Demented);
  EXPECT_EQ(fusion::fuse({0, 1}).outcome, Outcome::DementedHighProbability);
  EXPECT_EQ(fusion::fuse({1, 0}).outcome, Outcome::NonDementedHighProbability);
  EXPECT_EQ(fusion::fuse({0, 0}).outcome, Outcome::NonDemented);
}

TEST(Fusion, FacePolarityDominatesAndDisagreementQualifies) {
  for (int p1 : {0, 1})
    for (int p2 : {0, 1}) {
      const auto d = fusion::fuse({p1, p2});
      const bool demented = d.outcome == Outcome::Demented || d.outcome == Outcome::DementedHighProbability;
      const bool qualified =
          d.outcome == Outcome::DementedHighProbability || d.outcome == Outcome::NonDementedHighProbability;
      EXPECT_EQ(demented, p2 == 1);
      EXPECT_EQ(qualified, p1 != p2);
      EXPECT_DOUBLE_EQ(d.weighted_score, 0.3 * p1 + 0.7 * p2);
    }
  EXPECT_DOUBLE_EQ(fusion::kHealthWeight + fusion::kFaceWeight, 1.0);
}

TEST(Fusion, MissingOrInvalidPredictions) {
  EXPECT_THROW(fusion::fuse({std::nullopt, 1}), fusion::MissingPrediction);
  EXPECT_THROW(fusion::fuse({1, std::nullopt}), fusion::MissingPrediction);
  EXPECT_THROW(fusion::fuse({2, 1}), std::invalid_argument);
  EXPECT_EQ(fusion::describe(Outcome::DementedHighProbability), "Demented with a high probability");
}

TEST(Confusion, PerfectInvertedAndCounting) {
  const std::vector<int> truth = {1, 0, 1, 1, 0};
  std::vector<int> inverted;
  for (int t : truth) inverted.push_back(1 - t);
  const auto perfect = metrics::confusion(truth, truth);
  EXPECT_EQ(perfect.fp + perfect.fn, 0u);
  const auto inv = metrics::confusion(inverted, truth);
  EXPECT_EQ(inv.tp + inv.tn, 0u);

  nn::Rng rng(5);
  std::vector<int> p(1000), t(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    p[i] = static_cast<int>(rng.below(2));
    t[i] = static_cast<int>(rng.below(2));
  }
  EXPECT_EQ(metrics::confusion(p, t), test::count_confusion(p, t));
  EXPECT_EQ(metrics::confusion(p, t).total(), 1000u);
  EXPECT_THROW(metrics::confusion(std::vector<int>{1}, std::vector<int>{1, 0}), std::invalid_argument);
}

TEST(Summary, ReportedCounts) {
  const auto s = metrics::summarize({164, 171, 9, 16});
  EXPECT_NEAR(s.accuracy.value, 335.0 / 360.0, 1e-12);
  EXPECT_NEAR(s.accuracy.value, 0.930556, 5e-7);
  EXPECT_NEAR(s.precision.value, 164.0 / 173.0, 1e-12);
  EXPECT_NEAR(s.recall.value, 164.0 / 180.0, 1e-12);
  const double p = 164.0 / 173.0, r = 164.0 / 180.0;
  EXPECT_NEAR(s.f1.value, 2 * p * r / (p + r), 1e-12);
  EXPECT_FALSE(s.f1.degenerate);
}

TEST(Summary, PerfectAndDegenerate) {
  const auto ones = metrics::summarize({1, 1, 0, 0});
  for (const auto* r : {&ones.accuracy, &ones.precision, &ones.recall, &ones.f1}) EXPECT_EQ(r->value, 1.0);
  const auto none = metrics::summarize({0, 5, 0, 3});
  EXPECT_EQ(none.precision.value, 0.0);
  EXPECT_TRUE(none.precision.degenerate);
  EXPECT_FALSE(std::isnan(none.f1.value));
  EXPECT_TRUE(none.f1.degenerate);
  EXPECT_FALSE(none.recall.degenerate);
}

using test::concordance;

TEST(Roc, SeparatedAndTied) {
  EXPECT_EQ(metrics::roc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}).auc, 1.0);
  EXPECT_EQ(metrics::roc(std::vector<double>(6, 0.3), std::vector<int>{0, 1, 0, 1, 1, 0}).auc, 0.5);
  EXPECT_THROW(metrics::roc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), std::invalid_argument);
}

TEST(Roc, MatchesPairwiseOracleAndIsMonotoneInvariant) {
  nn::Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> s(200);
    std::vector<int> t(200);
    for (std::size_t i = 0; i < 200; ++i) {
      t[i] = static_cast<int>(rng.below(2));
      // Coarse rounding forces ties.
      s[i] = std::round((rng.uniform() + 0.3 * t[i]) * 20.0) / 20.0;
    }
    const auto curve = metrics::roc(s, t);
    EXPECT_LT(std::abs(curve.auc - concordance(s, t)), 1e-9);
    std::vector<double> transformed;
    for (double v : s) transformed.push_back(std::exp(3 * v) - 7);
    EXPECT_NEAR(metrics::roc(transformed, t).auc, curve.auc, 1e-12);
    EXPECT_EQ(curve.points.front().fpr, 0.0);
    EXPECT_EQ(curve.points.back().tpr, 1.0);
    EXPECT_EQ(curve.points.back().fpr, 1.0);
  }
}

TEST(Roc, CsvExport) {
  std::ostringstream out;
  metrics::write_roc_csv(out, metrics::roc(std::vector<double>{0.2, 0.8}, std::vector<int>{0, 1}));
  EXPECT_EQ(out.str(), "threshold,fpr,tpr\ninf,0,0\n0.8,0,1\n0.2,1,1\n");
}

TEST(Report, RowsThresholdAboveHalfAndWriteCsv) {
  const std::vector<double> scores = {0.9, 0.5, 0.6, 0.1};
  const std::vector<int> truth = {1, 1, 0, 0};
  const metrics::ReportRow row = metrics::report_row(30, scores, truth);
  EXPECT_EQ(row.cm, (metrics::ConfusionMatrix{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(row.summary.accuracy.value, 0.5);
  ASSERT_TRUE(row.auc);
  EXPECT_DOUBLE_EQ(*row.auc, 0.75);

  const std::vector<int> one_class = {1, 1, 1, 1};
  const metrics::ReportRow single = metrics::report_row(40, scores, one_class);
  EXPECT_FALSE(single.auc);

  std::ostringstream out;
  const std::vector<metrics::ReportRow> rows = {row, single};
  metrics::write_report_csv(out, rows);
  EXPECT_EQ(out.str(),
            "epoch,accuracy,precision,recall,f1,auc,tp,tn,fp,fn\n"
            "30,0.5,0.5,0.5,0.5,0.75,1,1,1,1\n"
            "40,0.5,1,0.5,0.6666666667,,2,0,0,2\n");
  EXPECT_THROW(metrics::report_row(1, scores, std::vector<int>{1}), std::invalid_argument);
}

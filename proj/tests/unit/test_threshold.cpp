#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mlrules/error.hpp"
#include "mlrules/experiment.hpp"
#include "mlrules/threshold.hpp"
#include "support/synthetic.hpp"

using namespace mlrules;

namespace {

/// Sort-and-scan oracle: the largest value v in the multiset with |{s >= v}| >= k.
double oracle_phi(std::vector<double> scores, double retention) {
  std::size_t k = 0;
  const double target = retention * static_cast<double>(scores.size());
  while (static_cast<double>(k) < target - 1e-9) ++k;
  k = std::max<std::size_t>(k, 1);
  double best = -1;
  for (double v : scores) {
    const auto n = static_cast<std::size_t>(std::count_if(scores.begin(), scores.end(), [&](double s) { return s >= v; }));
    if (n >= k) best = std::max(best, v);
  }
  return best;
}

Theory theory_with_scores(const std::vector<std::vector<double>>& per_label) {
  Theory t;
  for (std::size_t l = 0; l < per_label.size(); ++l) {
    LabelTheory lt;
    lt.label = l;
    for (double s : per_label[l]) lt.rules.push_back({Rule{{}, static_cast<std::uint32_t>(l), 1}, s, s});
    t.labels.push_back(lt);
  }
  return t;
}

}  // namespace

TEST(Threshold, Examples) {
  const std::vector<double> s{0.2, 0.5, 0.9};
  EXPECT_EQ(threshold_for_retention(s, 1.0), 0.2);
  EXPECT_EQ(threshold_for_retention(s, 0.34), 0.5);  // ceil(1.02) = 2
  EXPECT_EQ(threshold_for_retention(s, 0.33), 0.9);  // ceil(0.99) = 1
  EXPECT_EQ(threshold_for_retention(s, 0.05), 0.9);
  const std::vector<double> same(7, 0.4);
  for (double r : SweepGrid::default_retentions()) EXPECT_EQ(threshold_for_retention(same, r), 0.4);
}

TEST(Threshold, Errors) {
  EXPECT_THROW(threshold_for_retention(std::vector<double>{}, 0.5), ConfigError);
  EXPECT_THROW(threshold_for_retention(std::vector<double>{1.0}, 0.0), ConfigError);
  EXPECT_THROW(threshold_for_retention(std::vector<double>{1.0}, 1.5), ConfigError);
}

TEST(Threshold, RetainedTargetAbsorbsRounding) {
  // 0.15 * 20 evaluates to 3.0000000000000004
  EXPECT_EQ(retained_target(0.15, 20), 3u);
  EXPECT_EQ(retained_target(0.95, 20), 19u);
  EXPECT_EQ(retained_target(0.05, 3), 1u);
  EXPECT_EQ(retained_target(1.0, 400), 400u);
}

TEST(ThresholdProperty, MatchesOracleAndNests) {
  Rng rng(4);
  const auto retentions = SweepGrid::default_retentions();
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> scores(1 + rng.uniform_index(60));
    for (auto& s : scores) s = static_cast<double>(rng.uniform_index(12)) / 11.0;
    std::size_t prev_kept = 0;
    double prev_phi = INFINITY;
    for (auto it = retentions.rbegin(); it != retentions.rend(); ++it) {  // increasing retention
      const double phi = threshold_for_retention(scores, *it);
      EXPECT_EQ(phi, oracle_phi(scores, *it));
      EXPECT_LE(phi, prev_phi);
      const auto kept = static_cast<std::size_t>(std::count_if(scores.begin(), scores.end(), [&](double s) { return s >= phi; }));
      EXPECT_GE(kept, retained_target(*it, scores.size()));
      EXPECT_GE(kept, prev_kept);
      prev_kept = kept;
      prev_phi = phi;
    }
  }
}

TEST(ApplyThreshold, Examples) {
  const auto t = theory_with_scores({{0.2, 0.7}, {0.5}});
  EXPECT_EQ(stats(apply_threshold(t, 0.0)).rules, 3u);
  EXPECT_EQ(stats(apply_threshold(t, 0.71)).rules, 0u);
  const auto mid = apply_threshold(t, 0.5);
  EXPECT_EQ(mid.labels[0].rules.size(), 1u);
  EXPECT_EQ(mid.labels[0].rules[0].score, 0.7);
  EXPECT_EQ(mid.labels[1].rules.size(), 1u);
  EXPECT_EQ(apply_threshold(mid, 0.5), mid);
}

TEST(ScoreFullData, EmptyTraceAndResidualDifference) {
  MultiLabelDataset ds;
  ds.attributes = {AttributeSpec::numeric("x")};
  ds.label_names = {"y"};
  ds.labels = LabelMatrix(6, 1);
  for (int j = 0; j < 6; ++j) ds.instances.push_back({{static_cast<double>(j)}});
  for (int j : {0, 1, 2}) ds.labels.set(static_cast<std::size_t>(j), 0, true);
  ds.labels.set(5, 0, false);
  ds.minority = {1};
  const std::vector<Rule> rules{{{{0, Op::lt, 2.0}}, 0, 1}, {{{0, Op::lt, 4.0}}, 0, 1}};
  const auto spec = HeuristicSpec::precision();
  EXPECT_TRUE(score_full_data(SelectionTrace{}, rules, ds, spec).empty());
  const auto cov = build_coverage(rules, ds, 0);
  const auto trace = select_rules(cov, rules, spec);
  ASSERT_EQ(trace.steps.size(), 2u);
  const auto scored = score_full_data(trace, rules, ds, spec);
  EXPECT_EQ(scored, score_full_data(trace, rules, cov, spec));
  EXPECT_EQ(scored[0].score, 1.0);
  // second rule: residual {2,3,4,5} gives precision 1/2, full data gives 3/4
  EXPECT_EQ(scored[1].selection_score, 0.5);
  EXPECT_EQ(scored[1].score, 0.75);
}

#include <gtest/gtest.h>

#include <cmath>

#include "mlrules/error.hpp"
#include "mlrules/heuristics.hpp"
#include "support/synthetic.hpp"

using namespace mlrules;

namespace {

ConfusionMatrix random_matrix(Rng& rng, std::size_t max = 50) {
  return {static_cast<double>(rng.uniform_index(max)), static_cast<double>(rng.uniform_index(max)),
          static_cast<double>(rng.uniform_index(max)), static_cast<double>(rng.uniform_index(max))};
}

}  // namespace

TEST(Atomic, Cells) {
  EXPECT_EQ(atomic_confusion(1, 1, 1), (ConfusionMatrix{1, 0, 0, 0}));
  EXPECT_EQ(atomic_confusion(0, 1, 1), (ConfusionMatrix{0, 1, 0, 0}));
  EXPECT_EQ(atomic_confusion(1, 0, 1), (ConfusionMatrix{0, 0, 1, 0}));
  EXPECT_EQ(atomic_confusion(0, 0, 1), (ConfusionMatrix{0, 0, 0, 1}));
  // positivity is relative to the minority class
  EXPECT_EQ(atomic_confusion(0, 0, 0), (ConfusionMatrix{1, 0, 0, 0}));
  EXPECT_EQ(atomic_confusion(1, 0, 0), (ConfusionMatrix{0, 1, 0, 0}));
}

TEST(Add, Algebra) {
  EXPECT_EQ((ConfusionMatrix{1, 0, 0, 0} + ConfusionMatrix{0, 1, 0, 0}), (ConfusionMatrix{1, 1, 0, 0}));
  const ConfusionMatrix c{3, 1, 4, 1};
  EXPECT_EQ(c + ConfusionMatrix{}, c);
  Rng rng(1);
  ConfusionMatrix sum;
  for (int j = 0; j < 37; ++j) {
    sum += atomic_confusion(static_cast<std::uint8_t>(rng.uniform_index(2)),
                            static_cast<std::uint8_t>(rng.uniform_index(2)),
                            static_cast<std::uint8_t>(rng.uniform_index(2)));
  }
  EXPECT_EQ(sum.total(), 37);
  const auto a = random_matrix(rng), b = random_matrix(rng), d = random_matrix(rng);
  EXPECT_EQ(a + b, b + a);
  EXPECT_EQ((a + b) + d, a + (b + d));
}

TEST(ConfusionForRule, Examples) {
  MultiLabelDataset ds;
  ds.attributes = {AttributeSpec::numeric("x")};
  ds.label_names = {"y"};
  ds.labels = LabelMatrix(10, 1);
  for (int j = 0; j < 10; ++j) {
    ds.instances.push_back({{static_cast<double>(j)}});
    ds.labels.set(static_cast<std::size_t>(j), 0, j < 3);
  }
  ds.minority = compute_minority_classes(ds.labels);
  EXPECT_EQ(confusion_for_rule(Rule{{{0, Op::lt, 3.0}}, 0, 1}, ds, 0), (ConfusionMatrix{3, 0, 0, 7}));
  EXPECT_EQ(confusion_for_rule(Rule{{}, 0, 1}, ds, 0), (ConfusionMatrix{3, 7, 0, 0}));
}

TEST(ConfusionForRule, MatchesAtomicSum) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    synth::SyntheticShape shape;
    shape.instances = 1 + rng.uniform_index(25);
    shape.positive_rate = rng.uniform01();
    const auto ds = synth::synthetic_dataset(shape, rng);
    const auto rule = synth::random_rule(ds, 0, rng);
    ConfusionMatrix expected;
    for (std::size_t j = 0; j < ds.num_instances(); ++j) {
      const std::uint8_t t = ds.minority[0];
      const std::uint8_t yhat = covers(rule, ds.instances[j]) ? t : static_cast<std::uint8_t>(1 - t);
      expected += atomic_confusion(ds.labels.at(j, 0), yhat, t);
    }
    EXPECT_EQ(confusion_for_rule(rule, ds, 0), expected);
  }
}

TEST(Evaluate, Examples) {
  EXPECT_DOUBLE_EQ(evaluate(HeuristicSpec::precision(), {3, 1, 0, 0}), 0.75);
  EXPECT_NEAR(evaluate(HeuristicSpec::m_estimate(2), {3, 1, 5, 11}), 3.8 / 6.0, 1e-15);
  EXPECT_NEAR(evaluate(HeuristicSpec::f_measure(1), {1, 1, 0, 0}), 2.0 / 3.0, 1e-15);  // prec 0.5, rec 1
  EXPECT_DOUBLE_EQ(evaluate(HeuristicSpec::recall(), {3, 1, 1, 0}), 0.75);
}

TEST(Evaluate, ZeroOverZeroIsZero) {
  const ConfusionMatrix empty{0, 0, 0, 0};
  EXPECT_EQ(evaluate(HeuristicSpec::precision(), {0, 0, 4, 4}), 0);
  EXPECT_EQ(evaluate(HeuristicSpec::recall(), {0, 4, 0, 4}), 0);
  EXPECT_EQ(evaluate(HeuristicSpec::f_measure(1), {0, 4, 4, 0}), 0);
  EXPECT_EQ(evaluate(HeuristicSpec::m_estimate(0), empty), 0);
  EXPECT_EQ(evaluate(HeuristicSpec::m_estimate(3), empty), 0);
  EXPECT_EQ(evaluate(HeuristicSpec::wra(), empty), 0.5);  // raw 0, rescaled
}

TEST(Evaluate, WraRescaling) {
  // rule covers exactly the positives: raw = p/t * (1 - p/t)
  const ConfusionMatrix perfect{5, 0, 0, 5};
  EXPECT_DOUBLE_EQ(wra_raw(perfect), 0.25);
  EXPECT_DOUBLE_EQ(evaluate(HeuristicSpec::wra(), perfect), 1.0);
  const ConfusionMatrix inverse{0, 5, 5, 0};
  EXPECT_DOUBLE_EQ(wra_raw(inverse), -0.25);
  EXPECT_DOUBLE_EQ(evaluate(HeuristicSpec::wra(), inverse), 0.0);
}

TEST(Evaluate, InfiniteBetaIsRecall) {
  const ConfusionMatrix c{3, 7, 2, 1};
  EXPECT_DOUBLE_EQ(evaluate(HeuristicSpec::f_measure(INFINITY), c), recall(c));
  EXPECT_DOUBLE_EQ(evaluate(HeuristicSpec::f_measure(0), c), precision(c));
}

TEST(HeuristicProperty, IdentitiesAndRange) {
  Rng rng(3);
  const HeuristicSpec specs[] = {HeuristicSpec::precision(),     HeuristicSpec::recall(),
                                 HeuristicSpec::f_measure(0.5),  HeuristicSpec::f_measure(1),
                                 HeuristicSpec::f_measure(4),    HeuristicSpec::m_estimate(0),
                                 HeuristicSpec::m_estimate(22.5), HeuristicSpec::m_estimate(1e12),
                                 HeuristicSpec::wra()};
  for (int trial = 0; trial < 2000; ++trial) {
    const auto c = random_matrix(rng);
    if (c.tp + c.fp > 0) EXPECT_EQ(evaluate(HeuristicSpec::m_estimate(0), c), evaluate(HeuristicSpec::precision(), c));
    const double denom = 2 * c.tp + c.fp + c.fn;
    EXPECT_NEAR(evaluate(HeuristicSpec::f_measure(1), c), denom > 0 ? 2 * c.tp / denom : 0.0, 1e-12);
    for (const auto& s : specs) {
      const double h = evaluate(s, c);
      EXPECT_GE(h, 0.0) << s.to_string();
      EXPECT_LE(h, 1.0) << s.to_string();
    }
  }
}

TEST(HeuristicProperty, Monotonicity) {
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto c = random_matrix(rng);
    auto more_tp = c;
    more_tp.tp += 1;
    auto more_fp = c;
    more_fp.fp += 1;
    auto more_fn = c;
    more_fn.fn += 1;
    EXPECT_GE(precision(more_tp), precision(c));
    EXPECT_LE(precision(more_fp), precision(c));
    EXPECT_GE(recall(more_tp), recall(c));
    EXPECT_LE(recall(more_fn), recall(c));
  }
}

TEST(HeuristicProperty, BetaLimitsOrderLikePrecisionAndRecall) {
  Rng rng(5);
  const auto sign = [](double x) { return (x > 0) - (x < 0); };
  int checked = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const auto a = random_matrix(rng);
    const auto b = random_matrix(rng);
    if (a.tp == 0 || b.tp == 0) continue;  // F is 0 there regardless of beta
    const double dp = precision(a) - precision(b);
    const double dr = recall(a) - recall(b);
    if (std::abs(dp) > 1e-3) {
      EXPECT_EQ(sign(f_measure(a, 1e-6) - f_measure(b, 1e-6)), sign(dp));
      ++checked;
    }
    if (std::abs(dr) > 1e-3) {
      EXPECT_EQ(sign(f_measure(a, 1e6) - f_measure(b, 1e6)), sign(dr));
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(HeuristicSpec, Grammar) {
  EXPECT_EQ(HeuristicSpec::parse("precision"), HeuristicSpec::precision());
  EXPECT_EQ(HeuristicSpec::parse("recall"), HeuristicSpec::recall());
  EXPECT_EQ(HeuristicSpec::parse("wra"), HeuristicSpec::wra());
  EXPECT_EQ(HeuristicSpec::parse("m:16"), HeuristicSpec::m_estimate(16));
  EXPECT_EQ(HeuristicSpec::parse("m:0.5"), HeuristicSpec::m_estimate(0.5));
  EXPECT_EQ(HeuristicSpec::parse("f:1"), HeuristicSpec::f_measure(1));
  EXPECT_TRUE(std::isinf(HeuristicSpec::parse("f:inf").parameter));
  for (const char* bad : {"", "m", "m:", "m:-1", "m:abc", "f:1x", "x:1", " precision", "M:2", "m:nan"}) {
    EXPECT_THROW(HeuristicSpec::parse(bad), ConfigError) << bad;
  }
  for (const char* text : {"precision", "recall", "wra", "m:16", "m:0.25", "f:2", "f:inf", "m:524288"}) {
    EXPECT_EQ(HeuristicSpec::parse(text).to_string(), text);
  }
}

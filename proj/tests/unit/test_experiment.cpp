#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mlrules/error.hpp"
#include "mlrules/experiment.hpp"
#include "mlrules/rank.hpp"
#include "mlrules/theory.hpp"
#include "support/synthetic.hpp"

using namespace mlrules;

namespace {

MultiLabelDataset dataset(std::uint64_t seed, std::size_t instances = 60) {
  Rng rng(seed);
  synth::SyntheticShape shape;
  shape.instances = instances;
  shape.labels = 3;
  return invert_frequent_labels(synth::synthetic_dataset(shape, rng));
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.grid = SweepGrid{{0, 4}, {1.0, 0.5}};
  cfg.generation.gamma = 120;
  cfg.folds = 3;
  cfg.seed = 7;
  cfg.dataset_name = "synthetic";
  return cfg;
}

Metrics with_f1(double f1) {
  Metrics m;
  m.f1 = f1;
  return m;
}

DatasetTable table(const std::string& name, const std::vector<double>& f1) {
  DatasetTable t{name, {0, 2}, {1.0, 0.5}, {}};
  for (double v : f1) t.cells.push_back(with_f1(v));
  return t;
}

}  // namespace

TEST(Grid, DefaultShape) {
  const auto g = SweepGrid::standard();
  EXPECT_EQ(g.m_values.size(), 20u);
  EXPECT_EQ(g.retentions.size(), 20u);
  EXPECT_EQ(g.size(), 400u);
  EXPECT_EQ(g.m_values.front(), 0);
  EXPECT_EQ(g.m_values[1], 2);
  EXPECT_EQ(g.m_values.back(), 524288);
  EXPECT_EQ(g.retentions.front(), 1.0);
  EXPECT_NEAR(g.retentions.back(), 0.05, 1e-12);
  EXPECT_EQ(g.cell(1, 3), 23u);
  EXPECT_NO_THROW(g.validate());
  EXPECT_THROW((SweepGrid{{2, 1}, {1.0}}).validate(), ConfigError);
  EXPECT_THROW((SweepGrid{{1}, {0.0}}).validate(), ConfigError);
  EXPECT_THROW((SweepGrid{{1}, {}}).validate(), ConfigError);
  EXPECT_THROW((SweepGrid{{1}, {0.5, 0.5}}).validate(), ConfigError);
}

TEST(Grid, NumberList) {
  EXPECT_EQ(parse_number_list("0,2,4.5"), (std::vector<double>{0, 2, 4.5}));
  EXPECT_TRUE(parse_number_list("default").empty());
  EXPECT_THROW(parse_number_list("1,,2"), ConfigError);
  EXPECT_THROW(parse_number_list("1,x"), ConfigError);
}

TEST(KFold, Singletons) {
  const auto folds = kfold_split(10, 10, 3);
  ASSERT_EQ(folds.size(), 10u);
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    ASSERT_EQ(f.test.size(), 1u);
    EXPECT_EQ(f.train.size(), 9u);
    seen.insert(f.test[0]);
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(KFold, Errors) {
  EXPECT_THROW(kfold_split(10, 1, 0), ConfigError);
  EXPECT_THROW(kfold_split(3, 4, 0), ConfigError);
}

TEST(KFoldProperty, PartitionAndBalance) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(9);
    const std::size_t n = k + rng.uniform_index(200);
    const std::uint64_t seed = rng.uniform_index(1000);
    const auto folds = kfold_split(n, k, seed);
    ASSERT_EQ(folds.size(), k);
    std::vector<int> hits(n, 0);
    std::size_t lo = n, hi = 0;
    for (const auto& f : folds) {
      EXPECT_TRUE(std::is_sorted(f.train.begin(), f.train.end()));
      EXPECT_TRUE(std::is_sorted(f.test.begin(), f.test.end()));
      EXPECT_EQ(f.train.size() + f.test.size(), n);
      std::vector<std::size_t> both;
      std::set_intersection(f.train.begin(), f.train.end(), f.test.begin(), f.test.end(), std::back_inserter(both));
      EXPECT_TRUE(both.empty());
      for (auto j : f.test) ++hits[j];
      lo = std::min(lo, f.test.size());
      hi = std::max(hi, f.test.size());
    }
    EXPECT_LE(hi - lo, 1u);
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    EXPECT_EQ(kfold_split(n, k, seed)[0].test, folds[0].test);
  }
}

TEST(EvaluateGrid, MatchesIndependentTraining) {
  const auto ds = dataset(41, 90);
  const auto folds = kfold_split(ds.num_instances(), 3, 1);
  const auto train = ds.subset(folds[0].train);
  const auto test = ds.subset(folds[0].test);
  GenerationConfig g;
  g.gamma = 150;
  g.seed = 2;
  const auto pool = generate_candidates(train, g);
  const SweepGrid grid{{0, 1, 8}, {1.0, 0.6, 0.2}};
  const auto cells = evaluate_grid(pool, train, test, grid, ds.minority);
  ASSERT_EQ(cells.size(), 9u);
  for (std::size_t mi = 0; mi < grid.m_values.size(); ++mi) {
    for (std::size_t ri = 0; ri < grid.retentions.size(); ++ri) {
      TrainConfig cfg;
      cfg.spec = HeuristicSpec::m_estimate(grid.m_values[mi]);
      cfg.retention = grid.retentions[ri];
      const auto theory = build_theory(pool, train, cfg);
      auto expected = compute_metrics(test.labels, predict_batch(theory, test.instances), ds.minority);
      const auto s = stats(theory);
      expected.rules = static_cast<double>(s.rules);
      expected.avg_conditions = s.mean_conditions;
      const auto& got = cells[grid.cell(mi, ri)];
      EXPECT_EQ(got.precision, expected.precision);
      EXPECT_EQ(got.recall, expected.recall);
      EXPECT_EQ(got.f1, expected.f1);
      EXPECT_EQ(got.subset, expected.subset);
      EXPECT_EQ(got.rules, expected.rules);
      EXPECT_NEAR(got.avg_conditions, expected.avg_conditions, 1e-12);
    }
  }
}

TEST(Sweep, RowsAndMeans) {
  const auto ds = dataset(42);
  const auto cfg = small_config();
  const auto r = run_sweep(ds, cfg);
  ASSERT_EQ(r.folds.size(), 3u);
  ASSERT_EQ(r.fold_rows.size(), 12u);
  ASSERT_EQ(r.mean_rows.size(), 4u);
  EXPECT_EQ(r.all_rows().size(), 16u);
  for (std::size_t c = 0; c < 4; ++c) {
    const auto& mean = r.mean_rows[c];
    EXPECT_EQ(mean.fold, -1);
    double f1 = 0;
    for (std::size_t f = 0; f < 3; ++f) {
      const auto& row = r.fold_rows[f * 4 + c];
      EXPECT_EQ(row.fold, static_cast<int>(f));
      EXPECT_EQ(row.m, mean.m);
      EXPECT_EQ(row.retention, mean.retention);
      f1 += row.metrics.f1;
    }
    EXPECT_NEAR(mean.metrics.f1, f1 / 3, 1e-12);
  }
  EXPECT_EQ(r.mean_rows[1].m, 0);
  EXPECT_EQ(r.mean_rows[1].retention, 0.5);
  std::set<std::string> hashes;
  for (const auto& f : r.folds) {
    EXPECT_EQ(f.train_size + f.test_size, ds.num_instances());
    EXPECT_GE(f.pool_size, cfg.generation.gamma);
    hashes.insert(f.pool_hash);
  }
  EXPECT_EQ(hashes.size(), 3u);
}

TEST(Sweep, DeterministicAcrossRunsAndJobs) {
  const auto ds = dataset(43);
  auto cfg = small_config();
  const auto a = metrics_to_csv(run_sweep(ds, cfg).all_rows());
  EXPECT_EQ(metrics_to_csv(run_sweep(ds, cfg).all_rows()), a);
  cfg.jobs = 4;
  cfg.generation.jobs = 4;
  EXPECT_EQ(metrics_to_csv(run_sweep(ds, cfg).all_rows()), a);
  cfg.seed = 8;
  EXPECT_NE(metrics_to_csv(run_sweep(ds, cfg).all_rows()), a);
}

TEST(Tune, SingleCellEqualsPlainCv) {
  const auto ds = dataset(44);
  auto cfg = small_config();
  cfg.grid = SweepGrid{{4}, {0.5}};
  const auto sweep = run_sweep(ds, cfg);
  TuneConfig tc;
  tc.experiment = cfg;
  const auto tuned = nested_tune(ds, tc);
  ASSERT_EQ(tuned.folds.size(), 3u);
  for (std::size_t f = 0; f < 3; ++f) {
    EXPECT_EQ(tuned.folds[f].outer, sweep.fold_rows[f].metrics);
    EXPECT_TRUE(std::isnan(tuned.folds[f].inner_score));
  }
  EXPECT_EQ(tuned.mean, sweep.mean_rows[0].metrics);
}

TEST(Tune, PicksFromGridAndWritesCsv) {
  const auto ds = dataset(45);
  TuneConfig tc;
  tc.experiment = small_config();
  tc.inner_folds = 2;
  const auto tuned = nested_tune(ds, tc);
  for (const auto& f : tuned.folds) {
    EXPECT_TRUE(f.m == 0 || f.m == 4);
    EXPECT_TRUE(f.retention == 1.0 || f.retention == 0.5);
    EXPECT_GE(f.inner_score, 0);
  }
  const auto csv = tune_to_csv(tuned, "synthetic");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 + 1 + (csv[0] == '#' ? 1 : 0));
}

TEST(Tune, NestedSplitsStayInsideOuterTraining) {
  const auto splits = nested_splits(50, 5, 3, 9);
  ASSERT_EQ(splits.size(), 5u);
  for (const auto& s : splits) {
    ASSERT_EQ(s.inner.size(), 3u);
    const std::set<std::size_t> outer_train(s.outer.train.begin(), s.outer.train.end());
    std::set<std::size_t> inner_tests;
    for (const auto& in : s.inner) {
      EXPECT_EQ(in.train.size() + in.test.size(), s.outer.train.size());
      for (auto j : in.train) EXPECT_TRUE(outer_train.count(j));
      for (auto j : in.test) {
        EXPECT_TRUE(outer_train.count(j));
        EXPECT_TRUE(inner_tests.insert(j).second);
      }
    }
    EXPECT_EQ(inner_tests, outer_train);
  }
}

TEST(Tune, BestCellTieBreaks) {
  const SweepGrid grid{{0, 2}, {1.0, 0.5}};
  EXPECT_EQ(best_cell(std::vector<Metrics>{with_f1(0.1), with_f1(0.2), with_f1(0.9), with_f1(0.3)}, grid,
                      TargetMeasure::f1), 2u);
  // all tied: smallest m, then largest retention
  EXPECT_EQ(best_cell(std::vector<Metrics>(4, with_f1(0.5)), grid, TargetMeasure::f1), 0u);
  EXPECT_EQ(best_cell(std::vector<Metrics>{with_f1(0.1), with_f1(0.5), with_f1(0.5), with_f1(0.2)}, grid,
                      TargetMeasure::f1), 1u);
}

TEST(Rank, FractionalRanks) {
  EXPECT_EQ(fractional_ranks(std::vector<double>{0.9, 0.5, 0.9}, true), (std::vector<double>{1.5, 3, 1.5}));
  EXPECT_EQ(fractional_ranks(std::vector<double>{3, 1, 2}, false), (std::vector<double>{3, 1, 2}));
  EXPECT_EQ(fractional_ranks(std::vector<double>{1, 1, 1, 1}, true), (std::vector<double>(4, 2.5)));
}

TEST(Rank, HandOracle) {
  // cells m-major: (0,1.0) (0,0.5) (2,1.0) (2,0.5)
  const std::vector<DatasetTable> tables{table("a", {0.4, 0.3, 0.2, 0.1}), table("b", {0.1, 0.3, 0.3, 0.2})};
  const std::vector<std::string> measures{"f1"};
  const auto mats = rank_matrices(tables, measures);
  ASSERT_EQ(mats.size(), 1u);
  const auto& r = mats[0];
  // a ranks 1 2 3 4; b ranks 4 1.5 1.5 3
  EXPECT_EQ(r.mean_rank, (std::vector<double>{2.5, 1.75, 2.25, 3.5}));
  EXPECT_EQ(r.std_dev, (std::vector<double>{1.5, 0.25, 0.75, 0.5}));
  EXPECT_EQ(r.best[0], (std::vector<std::string>{"a"}));
  EXPECT_EQ(r.best[1], (std::vector<std::string>{"b"}));
  EXPECT_EQ(r.best[2], (std::vector<std::string>{"b"}));
  EXPECT_TRUE(r.best[3].empty());
  EXPECT_EQ(r.datasets, 2u);
}

TEST(Rank, LowerIsBetterForRuleCounts) {
  EXPECT_FALSE(higher_is_better("rules"));
  EXPECT_FALSE(higher_is_better("avg_conditions"));
  EXPECT_TRUE(higher_is_better("hamming"));
  EXPECT_THROW(higher_is_better("speed"), ConfigError);
}

TEST(RankProperty, RankSumAndSingleDataset) {
  Rng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DatasetTable> tables;
    const std::size_t d = 1 + rng.uniform_index(5);
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<double> f1(4);
      for (auto& v : f1) v = static_cast<double>(rng.uniform_index(4)) / 4;
      tables.push_back(table("d" + std::to_string(k), f1));
    }
    const std::vector<std::string> measures{"f1", "rules"};
    for (const auto& r : rank_matrices(tables, measures)) {
      double sum = 0;
      for (double v : r.mean_rank) sum += v;
      EXPECT_NEAR(sum, 10.0, 1e-9);  // 1 + 2 + 3 + 4 per dataset
      for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_GE(r.mean_rank[c], 1.0);
        EXPECT_LE(r.mean_rank[c], 4.0);
        if (d == 1) {
          EXPECT_EQ(r.std_dev[c], 0.0);
        }
      }
      std::size_t best_marks = 0;
      for (const auto& b : r.best) best_marks += b.empty() ? 0 : 1;
      EXPECT_GE(best_marks, 1u);
    }
  }
}

TEST(Rank, GridMismatch) {
  auto b = table("b", {0.1, 0.2, 0.3, 0.4});
  b.m_values = {0, 4};
  const std::vector<DatasetTable> tables{table("a", {0.1, 0.2, 0.3, 0.4}), b};
  const std::vector<std::string> measures{"f1"};
  EXPECT_THROW(rank_matrices(tables, measures), ConfigError);
}

TEST(Rank, FromMetricRowsAndCsvRoundTrip) {
  const auto ds = dataset(46);
  auto cfg = small_config();
  auto rows = run_sweep(ds, cfg).all_rows();
  cfg.dataset_name = "other";
  cfg.seed = 99;
  for (auto& row : run_sweep(ds, cfg).all_rows()) rows.push_back(row);
  const auto tables = tables_from_rows(rows);
  ASSERT_EQ(tables.size(), 2u);
  EXPECT_EQ(tables[0].cells.size(), 4u);
  const std::vector<std::string> measures(std::begin(kRankMeasures), std::end(kRankMeasures));
  const auto mats = rank_matrices(tables, measures);
  ASSERT_EQ(mats.size(), 7u);
  const auto csv = rank_matrices_to_csv(mats);
  EXPECT_NE(csv.find("\nmeasure,m,retention,mean_rank,std_dev,best_datasets\n"), std::string::npos);
  EXPECT_EQ(rank_matrices_to_csv(rank_matrices_from_csv(csv)), csv);
}

TEST(Report, HeatmapIsDeterministic) {
  const std::vector<DatasetTable> tables{table("a", {0.4, 0.3, 0.2, 0.1}), table("b", {0.1, 0.3, 0.3, 0.2})};
  const std::vector<std::string> measures{"f1"};
  const auto r = rank_matrices(tables, measures)[0];
  const auto svg = render_heatmap_svg(r);
  EXPECT_EQ(render_heatmap_svg(r), svg);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  std::size_t plus = 0;
  for (std::size_t p = svg.find(">+<"); p != std::string::npos; p = svg.find(">+<", p + 1)) ++plus;
  EXPECT_EQ(plus, 3u);
}

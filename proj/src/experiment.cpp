#include "mlrules/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "mlrules/error.hpp"
#include "mlrules/parallel.hpp"
#include "mlrules/random.hpp"
#include "mlrules/seco.hpp"
#include "mlrules/threshold.hpp"

namespace mlrules {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Selected {
  std::size_t label;
  std::size_t index;
  double score;
  std::size_t conditions;
};

}  // namespace

std::vector<double> SweepGrid::default_m_values() {
  std::vector<double> out{0.0};
  for (int e = 1; e <= 19; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

std::vector<double> SweepGrid::default_retentions() {
  std::vector<double> out;
  for (int pct = 100; pct >= 5; pct -= 5) out.push_back(pct / 100.0);
  return out;
}

SweepGrid SweepGrid::standard() { return {default_m_values(), default_retentions()}; }

void SweepGrid::validate() const {
  if (m_values.empty() || retentions.empty()) throw ConfigError("sweep grid axes must be non-empty");
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    if (!(m_values[i] >= 0) || std::isinf(m_values[i])) throw ConfigError("m values must be finite and >= 0");
    if (i > 0 && !(m_values[i] > m_values[i - 1])) throw ConfigError("m values must be strictly increasing");
  }
  const bool descending = retentions.size() > 1 && retentions[1] < retentions[0];
  for (std::size_t i = 0; i < retentions.size(); ++i) {
    if (!(retentions[i] > 0 && retentions[i] <= 1)) throw ConfigError("retentions must lie in (0, 1]");
    if (i > 0 && (descending ? !(retentions[i] < retentions[i - 1]) : !(retentions[i] > retentions[i - 1]))) {
      throw ConfigError("retentions must be strictly monotone");
    }
  }
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  if (text.empty() || text == "default") return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item(text.substr(start, comma == std::string_view::npos ? text.size() - start : comma - start));
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size()) {
      throw ConfigError("invalid number '" + item + "' in list '" + std::string(text) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (k > n) throw ConfigError("more folds (" + std::to_string(k) + ") than instances (" + std::to_string(n) + ")");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> fold_of(n);
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t p = f * n / k; p < (f + 1) * n / k; ++p) fold_of[order[p]] = f;
  }
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < k; ++f) (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
  }
  return folds;
}

std::vector<Metrics> evaluate_grid(const RulePool& pool, const MultiLabelDataset& train,
                                   const MultiLabelDataset& test, const SweepGrid& grid,
                                   std::span<const std::uint8_t> eval_minority, std::size_t jobs) {
  grid.validate();
  const std::size_t labels = train.num_labels();
  if (pool.label_count() != labels || test.num_labels() != labels) {
    throw ConfigError("pool, training and test label counts differ");
  }
  std::vector<CoverageMatrix> train_cov(labels);
  std::vector<std::vector<Bitset>> test_cov(labels);
  parallel_for(labels, jobs, [&](std::size_t l) {
    train_cov[l] = build_coverage(pool.rules(l), train, l);
    test_cov[l] = build_coverage(pool.rules(l), test, l).covered;
  });

  const std::size_t rows = test.num_instances();
  std::vector<Metrics> out(grid.size());
  parallel_for(grid.m_values.size(), jobs, [&](std::size_t mi) {
    const auto spec = HeuristicSpec::m_estimate(grid.m_values[mi]);
    std::vector<Selected> selected;
    for (std::size_t l = 0; l < labels; ++l) {
      const auto& rules = pool.rules(l);
      const auto trace = select_rules(train_cov[l], rules, spec);
      for (const auto& step : trace.steps) {
        selected.push_back({l, step.rule_index, evaluate(spec, coverage_confusion(train_cov[l], step.rule_index)),
                            rules[step.rule_index].size()});
      }
    }
    std::vector<double> scores;
    scores.reserve(selected.size());
    for (const auto& s : selected) scores.push_back(s.score);

    for (std::size_t ri = 0; ri < grid.retentions.size(); ++ri) {
      const double phi =
          scores.empty() ? 0.0 : threshold_for_retention(scores, grid.retentions[ri]);
      std::vector<Bitset> fired(labels, Bitset(rows));
      std::size_t kept = 0;
      std::size_t conditions = 0;
      for (const auto& s : selected) {
        if (s.score < phi) continue;
        fired[s.label] |= test_cov[s.label][s.index];
        ++kept;
        conditions += s.conditions;
      }
      LabelMatrix predicted(rows, labels);
      for (std::size_t j = 0; j < rows; ++j) {
        for (std::size_t l = 0; l < labels; ++l) {
          const std::uint8_t t = train.minority[l];
          predicted.set(j, l, fired[l].test(j) ? t : 1 - t);
        }
      }
      Metrics m = compute_metrics(test.labels, predicted, eval_minority);
      m.rules = static_cast<double>(kept);
      m.avg_conditions = kept ? static_cast<double>(conditions) / static_cast<double>(kept) : 0.0;
      out[grid.cell(mi, ri)] = m;
    }
  });
  return out;
}

std::vector<MetricsRow> SweepResult::all_rows() const {
  std::vector<MetricsRow> rows = fold_rows;
  rows.insert(rows.end(), mean_rows.begin(), mean_rows.end());
  return rows;
}

namespace {

struct FoldRun {
  std::vector<Metrics> cells;
  FoldInfo info;
};

FoldRun run_fold(const MultiLabelDataset& dataset, const Fold& fold, const SweepGrid& grid,
                 const GenerationConfig& base, std::uint64_t pool_seed, std::size_t jobs) {
  FoldRun run;
  const auto train = dataset.subset(fold.train);
  const auto test = dataset.subset(fold.test);
  GenerationConfig gen = base;
  gen.seed = pool_seed;
  gen.jobs = jobs;
  auto start = std::chrono::steady_clock::now();
  const auto pool = generate_candidates(train, gen);
  run.info.generation_seconds = seconds_since(start);
  start = std::chrono::steady_clock::now();
  run.cells = evaluate_grid(pool, train, test, grid, dataset.minority, jobs);
  run.info.evaluation_seconds = seconds_since(start);
  run.info.train_size = train.num_instances();
  run.info.test_size = test.num_instances();
  run.info.pool_seed = pool_seed;
  run.info.pool_hash = pool.hash();
  run.info.pool_size = pool.size();
  run.info.sweeps = pool.sweeps;
  run.info.warnings = pool.warnings;
  return run;
}

}  // namespace

SweepResult run_sweep(const MultiLabelDataset& dataset, const ExperimentConfig& config) {
  config.grid.validate();
  const auto folds = kfold_split(dataset.num_instances(), config.folds, derive_seed(config.seed, {1}));
  SweepResult result;
  std::vector<std::vector<Metrics>> per_fold;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    auto run = run_fold(dataset, folds[f], config.grid, config.generation, derive_seed(config.seed, {2, f}),
                        config.jobs);
    run.info.fold = f;
    for (std::size_t mi = 0; mi < config.grid.m_values.size(); ++mi) {
      for (std::size_t ri = 0; ri < config.grid.retentions.size(); ++ri) {
        result.fold_rows.push_back({config.dataset_name, static_cast<int>(f), config.grid.m_values[mi],
                                    config.grid.retentions[ri], run.cells[config.grid.cell(mi, ri)]});
      }
    }
    per_fold.push_back(std::move(run.cells));
    result.folds.push_back(std::move(run.info));
  }
  for (std::size_t mi = 0; mi < config.grid.m_values.size(); ++mi) {
    for (std::size_t ri = 0; ri < config.grid.retentions.size(); ++ri) {
      std::vector<Metrics> cell;
      for (const auto& f : per_fold) cell.push_back(f[config.grid.cell(mi, ri)]);
      result.mean_rows.push_back(
          {config.dataset_name, -1, config.grid.m_values[mi], config.grid.retentions[ri], mean_metrics(cell)});
    }
  }
  return result;
}

std::vector<NestedSplit> nested_splits(std::size_t n, std::size_t outer_k, std::size_t inner_k,
                                       std::uint64_t seed) {
  std::vector<NestedSplit> out;
  const auto outer = kfold_split(n, outer_k, derive_seed(seed, {1}));
  for (std::size_t o = 0; o < outer.size(); ++o) {
    NestedSplit split;
    split.outer = outer[o];
    const auto& rows = split.outer.train;
    for (const auto& inner : kfold_split(rows.size(), inner_k, derive_seed(seed, {3, o}))) {
      Fold mapped;
      for (const auto p : inner.train) mapped.train.push_back(rows[p]);
      for (const auto p : inner.test) mapped.test.push_back(rows[p]);
      split.inner.push_back(std::move(mapped));
    }
    out.push_back(std::move(split));
  }
  return out;
}

std::size_t best_cell(std::span<const Metrics> cells, const SweepGrid& grid, TargetMeasure target) {
  std::size_t best = 0;
  for (std::size_t mi = 0; mi < grid.m_values.size(); ++mi) {
    for (std::size_t ri = 0; ri < grid.retentions.size(); ++ri) {
      const std::size_t c = grid.cell(mi, ri);
      if (c == 0) continue;
      const double v = measure_value(cells[c], target);
      const double b = measure_value(cells[best], target);
      const std::size_t bm = best / grid.retentions.size();
      const std::size_t br = best % grid.retentions.size();
      bool better;
      if (!scores_tied(v, b)) {
        better = v > b;
      } else if (grid.m_values[mi] != grid.m_values[bm]) {
        better = grid.m_values[mi] < grid.m_values[bm];
      } else {
        better = grid.retentions[ri] > grid.retentions[br];
      }
      if (better) best = c;
    }
  }
  return best;
}

TuneResult nested_tune(const MultiLabelDataset& dataset, const TuneConfig& config) {
  const auto& exp = config.experiment;
  exp.grid.validate();
  const auto splits = nested_splits(dataset.num_instances(), exp.folds, config.inner_folds, exp.seed);
  TuneResult result;
  std::vector<Metrics> outer_metrics;
  for (std::size_t o = 0; o < splits.size(); ++o) {
    const auto& split = splits[o];
    std::size_t chosen = 0;
    double inner_score = std::numeric_limits<double>::quiet_NaN();
    if (exp.grid.size() > 1) {
      std::vector<std::vector<Metrics>> inner_cells;
      for (std::size_t i = 0; i < split.inner.size(); ++i) {
        inner_cells.push_back(run_fold(dataset, split.inner[i], exp.grid, exp.generation,
                                       derive_seed(exp.seed, {4, o, i}), exp.jobs)
                                  .cells);
      }
      std::vector<Metrics> means(exp.grid.size());
      for (std::size_t c = 0; c < means.size(); ++c) {
        std::vector<Metrics> cell;
        for (const auto& inner : inner_cells) cell.push_back(inner[c]);
        means[c] = mean_metrics(cell);
      }
      chosen = best_cell(means, exp.grid, config.target);
      inner_score = measure_value(means[chosen], config.target);
    }
    const std::size_t mi = chosen / exp.grid.retentions.size();
    const std::size_t ri = chosen % exp.grid.retentions.size();
    const SweepGrid single{{exp.grid.m_values[mi]}, {exp.grid.retentions[ri]}};
    auto run = run_fold(dataset, split.outer, single, exp.generation, derive_seed(exp.seed, {2, o}), exp.jobs);
    run.info.fold = o;
    TuneFold tf;
    tf.fold = o;
    tf.m = single.m_values[0];
    tf.retention = single.retentions[0];
    tf.inner_score = inner_score;
    tf.outer = run.cells[0];
    tf.info = std::move(run.info);
    outer_metrics.push_back(tf.outer);
    result.folds.push_back(std::move(tf));
  }
  result.mean = mean_metrics(outer_metrics);
  return result;
}

std::string tune_to_csv(const TuneResult& result, const std::string& dataset_name) {
  std::ostringstream os;
  os << "# mlrules tune format_version=1\n"
     << "dataset,fold,m,retention,inner_score,precision,recall,f1,hamming,subset,rules,avg_conditions\n";
  char buf[256];
  const auto line = [&](const std::string& fold, const std::string& m, const std::string& r, const std::string& inner,
                        const Metrics& x) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f\n", x.precision, x.recall, x.f1, x.hamming,
                  x.subset, x.rules, x.avg_conditions);
    os << dataset_name << ',' << fold << ',' << m << ',' << r << ',' << inner << buf;
  };
  for (const auto& f : result.folds) {
    char inner[32] = "";
    if (!std::isnan(f.inner_score)) std::snprintf(inner, sizeof inner, "%.6f", f.inner_score);
    line(std::to_string(f.fold), format_number(f.m), format_number(f.retention), inner, f.outer);
  }
  line("mean", "", "", "", result.mean);
  return os.str();
}

}  // namespace mlrules

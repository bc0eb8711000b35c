#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlrules/evaluation.hpp"
#include "mlrules/rule.hpp"

namespace mlrules {

struct SweepGrid {
  std::vector<double> m_values;    // strictly increasing
  std::vector<double> retentions;  // strictly monotone, each in (0, 1]

  /// m in {0, 2^1, ..., 2^19}, retention in {1.00, 0.95, ..., 0.05}.
  static SweepGrid standard();
  static std::vector<double> default_m_values();
  static std::vector<double> default_retentions();

  std::size_t size() const noexcept { return m_values.size() * retentions.size(); }
  /// Cells are m-major: cell = m_index * retentions.size() + retention_index.
  std::size_t cell(std::size_t m_index, std::size_t retention_index) const noexcept {
    return m_index * retentions.size() + retention_index;
  }
  void validate() const;
};

/// Parses a comma-separated list of numbers; `default` yields an empty vector.
std::vector<double> parse_number_list(std::string_view text);

struct Fold {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Shuffled, unstratified partition of [0, n) into k folds whose sizes differ by at most 1.
std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// Every grid cell evaluated on `test` using one shared pool drawn from `train`.
/// Selection runs once per m value; thresholds are applied per retention on top.
/// Predictions are scored against `eval_minority`.
std::vector<Metrics> evaluate_grid(const RulePool& pool, const MultiLabelDataset& train,
                                   const MultiLabelDataset& test, const SweepGrid& grid,
                                   std::span<const std::uint8_t> eval_minority, std::size_t jobs = 1);

struct ExperimentConfig {
  SweepGrid grid = SweepGrid::standard();
  GenerationConfig generation;  // seed is overwritten per fold
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string dataset_name = "dataset";
};

struct FoldInfo {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::uint64_t pool_seed = 0;
  std::string pool_hash;
  std::size_t pool_size = 0;
  std::size_t sweeps = 0;
  std::vector<std::string> warnings;
  double generation_seconds = 0;
  double evaluation_seconds = 0;
};

struct SweepResult {
  std::vector<MetricsRow> fold_rows;  // fold-major, then grid cell order
  std::vector<MetricsRow> mean_rows;  // grid cell order
  std::vector<FoldInfo> folds;

  /// Fold rows followed by mean rows.
  std::vector<MetricsRow> all_rows() const;
};

/// Seed streams: fold split = derive(seed, {1}), fold pool = derive(seed, {2, fold}).
SweepResult run_sweep(const MultiLabelDataset& dataset, const ExperimentConfig& config);

struct TuneConfig {
  ExperimentConfig experiment;
  std::size_t inner_folds = 5;
  TargetMeasure target = TargetMeasure::f1;
};

struct TuneFold {
  std::size_t fold = 0;
  double m = 0;
  double retention = 1;
  double inner_score = 0;  // inner-CV mean of the target; NaN when the grid has one cell
  Metrics outer;
  FoldInfo info;
};

struct TuneResult {
  std::vector<TuneFold> folds;
  Metrics mean;
};

/// Inner folds partition the outer training rows only; each inner split and
/// pool has its own stream (derive(seed, {3, outer}), derive(seed, {4, outer, inner})).
/// Outer pools reuse run_sweep's streams, so a one-cell grid reproduces plain CV.
TuneResult nested_tune(const MultiLabelDataset& dataset, const TuneConfig& config);

/// Outer and inner splits as used by nested_tune, with inner indices mapped back to dataset rows.
struct NestedSplit {
  Fold outer;
  std::vector<Fold> inner;
};
std::vector<NestedSplit> nested_splits(std::size_t n, std::size_t outer_k, std::size_t inner_k, std::uint64_t seed);

/// Picks the best cell by the target mean; ties go to smaller m, then larger retention.
std::size_t best_cell(std::span<const Metrics> cells, const SweepGrid& grid, TargetMeasure target);

/// CSV: fold,m,retention,inner_score,precision,recall,f1,hamming,subset,rules,avg_conditions, then a mean row.
std::string tune_to_csv(const TuneResult& result, const std::string& dataset_name);

}  // namespace mlrules

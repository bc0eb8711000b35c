#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlrules/dataset.hpp"
#include "mlrules/heuristics.hpp"

namespace mlrules {

/// Sum of atomic matrices over every (instance, label) cell. Throws DataError on shape mismatch.
ConfusionMatrix global_confusion(const LabelMatrix& truth, const LabelMatrix& predicted,
                                 std::span<const std::uint8_t> minority);

struct MicroMeasures {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

MicroMeasures micro_measures(const ConfusionMatrix& c) noexcept;
double hamming_accuracy(const ConfusionMatrix& c) noexcept;
double subset_accuracy(const LabelMatrix& truth, const LabelMatrix& predicted);

struct Metrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double hamming = 0;
  double subset = 0;
  double rules = 0;
  double avg_conditions = 0;

  bool operator==(const Metrics&) const = default;
};

enum class TargetMeasure : std::uint8_t { f1, hamming, subset };

TargetMeasure parse_target(std::string_view text);
const char* target_name(TargetMeasure target) noexcept;
double measure_value(const Metrics& m, TargetMeasure target) noexcept;

/// Prediction quality only; rule columns are left at zero.
Metrics compute_metrics(const LabelMatrix& truth, const LabelMatrix& predicted, std::span<const std::uint8_t> minority);

/// Column-wise arithmetic mean.
Metrics mean_metrics(std::span<const Metrics> folds);

/// One row of the metrics CSV. `fold` is the fold ordinal, or -1 for the cross-validation mean.
struct MetricsRow {
  std::string dataset;
  int fold = -1;
  double m = 0;
  double retention = 1;
  Metrics metrics;
};

inline constexpr std::string_view kMetricsHeader =
    "dataset,fold,m,retention,precision,recall,f1,hamming,subset,rules,avg_conditions";

/// Leading `# mlrules metrics format_version=1` comment, header, one line per row.
std::string metrics_to_csv(std::span<const MetricsRow> rows);
std::vector<MetricsRow> metrics_from_csv(std::string_view text);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

}  // namespace mlrules

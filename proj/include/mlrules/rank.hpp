#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlrules/evaluation.hpp"

namespace mlrules {

/// CV-mean metrics of one dataset over a grid, m-major.
struct DatasetTable {
  std::string dataset;
  std::vector<double> m_values;
  std::vector<double> retentions;
  std::vector<Metrics> cells;
};

/// Groups the mean rows of a metrics CSV by dataset, in order of first appearance.
std::vector<DatasetTable> tables_from_rows(std::span<const MetricsRow> rows);

/// precision, recall, f1, hamming, subset rank higher-is-better; rules and
/// avg_conditions rank lower-is-better.
inline constexpr const char* kRankMeasures[] = {"precision", "recall", "f1", "hamming", "subset", "rules",
                                                "avg_conditions"};

double metric_by_name(const Metrics& m, std::string_view measure);
bool higher_is_better(std::string_view measure);

/// 1 = best; tied values share the mean of the positions they occupy.
std::vector<double> fractional_ranks(std::span<const double> values, bool higher_better);

struct RankMatrix {
  std::string measure;
  std::vector<double> m_values;
  std::vector<double> retentions;
  std::vector<double> mean_rank;  // per cell, averaged over datasets
  std::vector<double> std_dev;    // population standard deviation over datasets
  std::vector<std::vector<std::string>> best;  // datasets whose raw best value sits in the cell
  std::size_t datasets = 0;
};

/// Throws ConfigError when tables disagree on the grid.
std::vector<RankMatrix> rank_matrices(std::span<const DatasetTable> tables, std::span<const std::string> measures);

/// measure,m,retention,mean_rank,std_dev,best_datasets (best datasets joined by ';').
std::string rank_matrices_to_csv(std::span<const RankMatrix> matrices);
std::vector<RankMatrix> rank_matrices_from_csv(std::string_view text);

/// Heatmap with retentions as rows and m values as columns, five shading
/// steps by mean-rank quantile (darker = better) and '+' in best cells.
std::string render_heatmap_svg(const RankMatrix& matrix);

}  // namespace mlrules

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mlrules/bitset.hpp"
#include "mlrules/heuristics.hpp"
#include "mlrules/rule.hpp"

namespace mlrules {

/// Coverage of one label's candidate rules over a fixed instance set.
struct CoverageMatrix {
  std::size_t label = 0;
  Bitset positives;            // rows whose label value equals the minority class
  std::vector<Bitset> covered;  // one per candidate, pool order

  std::size_t instances() const noexcept { return positives.size(); }
};

CoverageMatrix build_coverage(std::span<const Rule> rules, const MultiLabelDataset& dataset, std::size_t label);

/// Full-set confusion of candidate `index` (no residual masking).
ConfusionMatrix coverage_confusion(const CoverageMatrix& coverage, std::size_t index) noexcept;

struct SelectionStep {
  std::size_t rule_index = 0;  // position in the label's pool
  double score = 0.0;          // heuristic value on the residual set
  std::size_t tp = 0;          // residual positives newly covered
  std::size_t fp = 0;          // residual negatives newly covered
  std::size_t residual_positives = 0;  // after removal
};

struct SelectionTrace {
  std::size_t label = 0;
  std::vector<SelectionStep> steps;
  std::vector<std::string> warnings;
};

/// Relative tolerance under which two heuristic values count as tied.
inline constexpr double kTieTolerance = 1e-12;

bool scores_tied(double a, double b) noexcept;

/// Separate-and-conquer over precomputed coverage. Each round scores every
/// remaining candidate with residual TP > 0 on the residual set and takes the
/// best by (score, TP, fewer conditions, pool order); all covered residual
/// rows are then removed.
SelectionTrace select_rules(const CoverageMatrix& coverage, std::span<const Rule> rules, const HeuristicSpec& spec);

SelectionTrace select_rules_for_label(const RulePool& pool, const MultiLabelDataset& dataset, std::size_t label,
                                      const HeuristicSpec& spec);

/// CSV columns: label,step,rule_id,score,tp,fp,residual_positives.
std::string trace_to_csv(std::span<const SelectionTrace> traces);

}  // namespace mlrules

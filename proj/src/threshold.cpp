#include "mlrules/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mlrules/error.hpp"

namespace mlrules {

std::vector<ScoredRule> score_full_data(const SelectionTrace& trace, std::span<const Rule> rules,
                                        const MultiLabelDataset& dataset, const HeuristicSpec& spec) {
  std::vector<ScoredRule> out;
  out.reserve(trace.steps.size());
  for (const auto& step : trace.steps) {
    const auto& rule = rules[step.rule_index];
    out.push_back({rule, evaluate(spec, confusion_for_rule(rule, dataset, trace.label)), step.score});
  }
  return out;
}

std::vector<ScoredRule> score_full_data(const SelectionTrace& trace, std::span<const Rule> rules,
                                        const CoverageMatrix& coverage, const HeuristicSpec& spec) {
  std::vector<ScoredRule> out;
  out.reserve(trace.steps.size());
  for (const auto& step : trace.steps) {
    out.push_back(
        {rules[step.rule_index], evaluate(spec, coverage_confusion(coverage, step.rule_index)), step.score});
  }
  return out;
}

std::size_t retained_target(double retention, std::size_t n) {
  if (!(retention > 0 && retention <= 1)) throw ConfigError("retention must lie in (0, 1]");
  // the epsilon absorbs products such as 0.15 * 20 = 3.0000000000000004
  const double raw = std::ceil(retention * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 0.0)), 1, std::max<std::size_t>(n, 1));
}

double threshold_for_retention(std::span<const double> scores, double retention) {
  if (scores.empty()) throw ConfigError("cannot derive a threshold from an empty score list");
  const std::size_t k = retained_target(retention, scores.size());
  std::vector<double> sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                   std::greater<>());
  return sorted[k - 1];
}

Theory apply_threshold(Theory theory, double phi) {
  for (auto& label : theory.labels) {
    std::erase_if(label.rules, [phi](const ScoredRule& r) { return r.score < phi; });
  }
  theory.threshold = phi;
  return theory;
}

}  // namespace mlrules

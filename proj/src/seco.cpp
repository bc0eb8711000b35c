#include "mlrules/seco.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mlrules {

CoverageMatrix build_coverage(std::span<const Rule> rules, const MultiLabelDataset& dataset, std::size_t label) {
  CoverageMatrix out;
  out.label = label;
  const std::size_t m = dataset.num_instances();
  const std::uint8_t t = dataset.minority.at(label);
  out.positives = Bitset(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (dataset.labels.at(j, label) == t) out.positives.set(j);
  }
  out.covered.reserve(rules.size());
  for (const auto& rule : rules) {
    Bitset cov(m);
    for (std::size_t j = 0; j < m; ++j) {
      if (covers(rule, dataset.instances[j])) cov.set(j);
    }
    out.covered.push_back(std::move(cov));
  }
  return out;
}

ConfusionMatrix coverage_confusion(const CoverageMatrix& coverage, std::size_t index) noexcept {
  const auto& cov = coverage.covered[index];
  const auto tp = static_cast<double>(Bitset::count_and(cov, coverage.positives));
  const auto covered = static_cast<double>(cov.count());
  const auto p = static_cast<double>(coverage.positives.count());
  const auto m = static_cast<double>(coverage.instances());
  return {tp, covered - tp, p - tp, m - p - (covered - tp)};
}

bool scores_tied(double a, double b) noexcept {
  return std::abs(a - b) <= kTieTolerance * std::max(std::abs(a), std::abs(b));
}

SelectionTrace select_rules(const CoverageMatrix& coverage, std::span<const Rule> rules, const HeuristicSpec& spec) {
  SelectionTrace trace;
  trace.label = coverage.label;
  Bitset residual(coverage.instances(), true);
  std::size_t residual_pos = coverage.positives.count();
  if (residual_pos == 0) return trace;
  if (rules.empty()) {
    trace.warnings.push_back("label " + std::to_string(coverage.label) + ": empty candidate pool, " +
                             std::to_string(residual_pos) + " positives uncovered");
    return trace;
  }

  // Residual TP only shrinks, so a candidate that reaches zero stays ineligible.
  std::vector<std::size_t> live(rules.size());
  for (std::size_t i = 0; i < live.size(); ++i) live[i] = i;

  std::size_t residual_count = coverage.instances();
  while (residual_pos > 0) {
    ConfusionMatrix base{0, 0, static_cast<double>(residual_pos), static_cast<double>(residual_count - residual_pos)};
    bool found = false;
    std::size_t best = 0;
    double best_score = 0;
    std::size_t best_tp = 0;
    std::size_t best_fp = 0;
    std::size_t keep = 0;
    for (const std::size_t i : live) {
      const auto& cov = coverage.covered[i];
      const std::size_t tp = Bitset::count_and(cov, residual, coverage.positives);
      if (tp == 0) continue;
      live[keep++] = i;
      const std::size_t fp = Bitset::count_and(cov, residual) - tp;
      ConfusionMatrix c = base;
      c.tp = static_cast<double>(tp);
      c.fn -= static_cast<double>(tp);
      c.fp = static_cast<double>(fp);
      c.tn -= static_cast<double>(fp);
      const double score = evaluate(spec, c);
      bool better = !found;
      if (!better) {
        if (!scores_tied(score, best_score)) {
          better = score > best_score;
        } else if (tp != best_tp) {
          better = tp > best_tp;
        } else {
          better = rules[i].size() < rules[best].size();
        }
      }
      if (better) {
        found = true;
        best = i;
        best_score = score;
        best_tp = tp;
        best_fp = fp;
      }
    }
    live.resize(keep);
    if (!found) {
      trace.warnings.push_back("label " + std::to_string(coverage.label) + ": coverage gap, " +
                               std::to_string(residual_pos) + " positives not covered by any candidate");
      break;
    }
    residual.subtract(coverage.covered[best]);
    residual_pos -= best_tp;
    residual_count -= best_tp + best_fp;
    trace.steps.push_back({best, best_score, best_tp, best_fp, residual_pos});
    // the selected rule now has residual TP 0 and drops out on the next scan
  }
  return trace;
}

SelectionTrace select_rules_for_label(const RulePool& pool, const MultiLabelDataset& dataset, std::size_t label,
                                      const HeuristicSpec& spec) {
  const auto& rules = pool.rules(label);
  return select_rules(build_coverage(rules, dataset, label), rules, spec);
}

std::string trace_to_csv(std::span<const SelectionTrace> traces) {
  std::ostringstream os;
  os << "label,step,rule_id,score,tp,fp,residual_positives\n";
  char score[32];
  for (const auto& trace : traces) {
    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
      const auto& step = trace.steps[s];
      std::snprintf(score, sizeof score, "%.12g", step.score);
      os << trace.label << ',' << s << ',' << step.rule_index << ',' << score << ',' << step.tp << ',' << step.fp
         << ',' << step.residual_positives << '\n';
    }
  }
  return os.str();
}

}  // namespace mlrules

#include "mlrules/theory.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "mlrules/error.hpp"
#include "mlrules/parallel.hpp"
#include "mlrules/threshold.hpp"

namespace mlrules {

TheoryStats stats(const Theory& theory) noexcept {
  TheoryStats s;
  std::size_t conditions = 0;
  for (const auto& label : theory.labels) {
    s.rules += label.rules.size();
    for (const auto& r : label.rules) conditions += r.rule.size();
  }
  if (s.rules > 0) s.mean_conditions = static_cast<double>(conditions) / static_cast<double>(s.rules);
  return s;
}

std::vector<std::uint8_t> predict(const Theory& theory, const Instance& instance) {
  std::vector<std::uint8_t> out(theory.labels.size());
  for (std::size_t i = 0; i < theory.labels.size(); ++i) {
    const auto& label = theory.labels[i];
    const bool fired = std::any_of(label.rules.begin(), label.rules.end(),
                                   [&](const ScoredRule& r) { return covers(r.rule, instance); });
    out[i] = fired ? label.minority : static_cast<std::uint8_t>(1 - label.minority);
  }
  return out;
}

LabelMatrix predict_batch(const Theory& theory, std::span<const Instance> instances) {
  LabelMatrix out(0, theory.labels.size());
  for (const auto& inst : instances) out.append_row(predict(theory, inst));
  return out;
}

LabelMatrix restore_polarity(LabelMatrix predictions, std::span<const std::size_t> inverted) {
  for (const auto col : inverted) predictions.flip_column(col);
  return predictions;
}

Theory build_theory(const RulePool& pool, const MultiLabelDataset& dataset, const TrainConfig& config) {
  if (pool.label_count() != dataset.num_labels()) {
    throw ConfigError("pool has " + std::to_string(pool.label_count()) + " labels, dataset has " +
                      std::to_string(dataset.num_labels()));
  }
  if (!pool.dataset_hash.empty() && pool.dataset_hash != dataset_hash(dataset)) {
    throw ConfigError("pool was generated from a different dataset (hash " + pool.dataset_hash + ", data " +
                      dataset_hash(dataset) + ")");
  }
  retained_target(config.retention, 1);  // validates the range

  Theory theory;
  theory.attributes = dataset.attributes;
  theory.label_names = dataset.label_names;
  theory.inverted = dataset.inverted;
  theory.spec = config.spec;
  theory.retention = config.retention;
  theory.scope = config.scope;
  theory.provenance = {pool.seed, pool.gamma, pool.dataset_hash, pool.hash()};
  theory.labels.resize(dataset.num_labels());

  std::vector<std::vector<std::string>> warnings(dataset.num_labels());
  parallel_for(dataset.num_labels(), config.jobs, [&](std::size_t label) {
    const auto& rules = pool.rules(label);
    const auto coverage = build_coverage(rules, dataset, label);
    const auto trace = select_rules(coverage, rules, config.spec);
    auto& lt = theory.labels[label];
    lt.label = label;
    lt.minority = dataset.minority[label];
    lt.rules = score_full_data(trace, rules, coverage, config.spec);
    warnings[label] = trace.warnings;
  });
  for (auto& w : warnings) theory.warnings.insert(theory.warnings.end(), w.begin(), w.end());
  theory.selected_rules = stats(theory).rules;

  if (config.scope == ThresholdScope::pooled) {
    std::vector<double> scores;
    for (const auto& lt : theory.labels) {
      for (const auto& r : lt.rules) scores.push_back(r.score);
    }
    if (!scores.empty()) theory = apply_threshold(std::move(theory), threshold_for_retention(scores, config.retention));
  } else {
    theory.label_thresholds.assign(theory.labels.size(), std::nullopt);
    for (auto& lt : theory.labels) {
      if (lt.rules.empty()) continue;
      std::vector<double> scores;
      for (const auto& r : lt.rules) scores.push_back(r.score);
      const double phi = threshold_for_retention(scores, config.retention);
      std::erase_if(lt.rules, [phi](const ScoredRule& r) { return r.score < phi; });
      theory.label_thresholds[lt.label] = phi;
    }
  }
  return theory;
}

std::string theory_to_listing(const Theory& theory) {
  std::ostringstream os;
  char buf[64];
  const auto s = stats(theory);
  os << "# heuristic " << theory.spec.to_string() << ", retention " << theory.retention;
  if (theory.threshold) {
    std::snprintf(buf, sizeof buf, "%.4f", *theory.threshold);
    os << ", threshold " << buf;
  }
  std::snprintf(buf, sizeof buf, "%.2f", s.mean_conditions);
  os << "\n# " << s.rules << " rules, " << buf << " conditions per rule\n";
  for (const auto& lt : theory.labels) {
    const bool flipped = std::find(theory.inverted.begin(), theory.inverted.end(), lt.label) != theory.inverted.end();
    const bool present = (lt.minority == 1) != flipped;
    const std::string head = (present ? "" : "!") + theory.label_names.at(lt.label);
    for (const auto& r : lt.rules) {
      std::snprintf(buf, sizeof buf, "%.4f", r.score);
      os << head << " \xE2\x86\x90 ";  // ←
      os << (r.rule.body.empty() ? std::string("true") : format_body(r.rule.body, theory.attributes));
      os << "  [" << buf << "]\n";
    }
  }
  return os.str();
}

}  // namespace mlrules

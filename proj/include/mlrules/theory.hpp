#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlrules/dataset.hpp"
#include "mlrules/heuristics.hpp"
#include "mlrules/rule.hpp"

namespace mlrules {

struct ScoredRule {
  Rule rule;
  double score = 0.0;            // full training data, used for thresholding
  double selection_score = 0.0;  // residual set at the moment of selection

  bool operator==(const ScoredRule&) const = default;
};

struct LabelTheory {
  std::size_t label = 0;
  std::uint8_t minority = 1;
  std::vector<ScoredRule> rules;  // retained rules, selection order

  bool operator==(const LabelTheory&) const = default;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::size_t gamma = 0;
  std::string dataset_hash;
  std::string pool_hash;

  bool operator==(const Provenance&) const = default;
};

enum class ThresholdScope : std::uint8_t { pooled, per_label };

/// Unordered per-label DNF. Label i predicts its minority class iff at least
/// one retained rule for i covers the instance.
struct Theory {
  std::vector<AttributeSpec> attributes;
  std::vector<std::string> label_names;
  std::vector<std::size_t> inverted;  // label columns flipped at ingestion
  std::vector<LabelTheory> labels;    // indexed by label
  HeuristicSpec spec;
  double retention = 1.0;
  ThresholdScope scope = ThresholdScope::pooled;
  std::optional<double> threshold;                    // pooled phi
  std::vector<std::optional<double>> label_thresholds;  // per-label phi, per_label scope only
  std::size_t selected_rules = 0;                     // before thresholding
  Provenance provenance;
  std::vector<std::string> warnings;

  bool operator==(const Theory&) const = default;
};

struct TheoryStats {
  std::size_t rules = 0;
  double mean_conditions = 0.0;
};

TheoryStats stats(const Theory& theory) noexcept;

std::vector<std::uint8_t> predict(const Theory& theory, const Instance& instance);
LabelMatrix predict_batch(const Theory& theory, std::span<const Instance> instances);

/// Flips back the columns listed in `inverted`, for output in the original polarity.
LabelMatrix restore_polarity(LabelMatrix predictions, std::span<const std::size_t> inverted);

struct TrainConfig {
  HeuristicSpec spec = HeuristicSpec::m_estimate(16);
  double retention = 1.0;
  ThresholdScope scope = ThresholdScope::pooled;
  std::size_t jobs = 1;
};

/// SeCo selection per label, full-data scoring, threshold at `retention`.
Theory build_theory(const RulePool& pool, const MultiLabelDataset& dataset, const TrainConfig& config);

/// Rule listing, one `label ← cond ∧ cond` line per rule with its score.
std::string theory_to_listing(const Theory& theory);

/// Versioned JSON model; conditions carry attribute names and nominal values.
std::string theory_to_json(const Theory& theory);
Theory theory_from_json(std::string_view text);

/// Throws ConfigError unless the dataset's attributes and labels match the model's.
void check_compatible(const Theory& theory, const MultiLabelDataset& dataset);

}  // namespace mlrules

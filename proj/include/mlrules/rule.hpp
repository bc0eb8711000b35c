#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mlrules/dataset.hpp"
#include "mlrules/forest.hpp"

namespace mlrules {

/// Declaration order is the sort order of normalized bodies.
enum class Op : std::uint8_t { eq, neq, ge, lt };

const char* op_symbol(Op op) noexcept;

struct Condition {
  std::uint32_t attribute = 0;
  Op op = Op::lt;
  double value = 0.0;  // nominal index for eq/neq, threshold for lt/ge

  bool holds(double v) const noexcept {
    switch (op) {
      case Op::eq: return v == value;
      case Op::neq: return !is_missing(v) && v != value;
      case Op::ge: return v >= value;
      case Op::lt: return v < value;
    }
    return false;
  }

  auto operator<=>(const Condition&) const = default;
};

/// H <- B with a single-label head. The head assignment is always the label's
/// minority class.
struct Rule {
  std::vector<Condition> body;
  std::uint32_t label = 0;
  std::uint8_t head = 1;

  std::size_t size() const noexcept { return body.size(); }

  bool operator==(const Rule&) const = default;
};

bool covers(const Rule& rule, const Instance& instance) noexcept;

/// Collapses numeric bounds to the tightest pair per attribute, folds nominal
/// (in)equalities, and sorts. Returns nullopt when the conjunction is unsatisfiable.
std::optional<std::vector<Condition>> normalize_body(std::vector<Condition> conditions);

/// One rule per minority-class leaf of each tree, normalized and deduplicated.
std::vector<Rule> extract_rules(std::span<const DecisionTree> forest, const MultiLabelDataset& dataset,
                                std::size_t label);

/// Conditions along the root-to-leaf path, before normalization.
std::vector<Condition> path_conditions(const DecisionTree& tree, std::size_t leaf);

/// Per-label candidate pools, duplicate-free under (label, body).
class RulePool {
 public:
  RulePool() = default;
  explicit RulePool(std::size_t label_count) : by_label_(label_count), seen_(label_count) {}

  std::size_t label_count() const noexcept { return by_label_.size(); }
  std::size_t size() const noexcept;
  const std::vector<Rule>& rules(std::size_t label) const { return by_label_.at(label); }

  /// Returns false when the rule is already present.
  bool insert(Rule rule);

  /// Content fingerprint; equal pools (including order) hash equally.
  std::string hash() const;

  std::vector<std::string> warnings;
  std::size_t sweeps = 0;
  std::uint64_t seed = 0;
  std::size_t gamma = 0;
  std::string dataset_hash;

 private:
  std::vector<std::vector<Rule>> by_label_;
  std::vector<std::set<std::vector<Condition>>> seen_;
};

struct GenerationConfig {
  std::size_t gamma = 10000;
  ForestConfig forest;  // max_depth and seed are set per forest
  std::size_t min_depth = 0;
  std::size_t max_depth = 8;
  std::uint64_t seed = 0;
  std::size_t max_sweeps = 1000;
  std::size_t stall_sweeps = 5;  // stop after this many sweeps without a new rule
  std::size_t jobs = 1;
};

/// Full sweeps over (label x depth) forests until the pool holds at least gamma rules.
RulePool generate_candidates(const MultiLabelDataset& dataset, const GenerationConfig& config);

/// Line-oriented pool listing: `label_name <- cond ∧ cond ...`, versioned header.
std::string pool_to_text(const RulePool& pool, const MultiLabelDataset& dataset);
RulePool pool_from_text(std::string_view text, const MultiLabelDataset& dataset);

/// JSON pool with attribute indices and provenance.
std::string pool_to_json(const RulePool& pool, const MultiLabelDataset& dataset);
RulePool pool_from_json(std::string_view text);

/// Human-readable condition / body rendering shared by pool and model listings.
std::string format_condition(const Condition& c, const std::vector<AttributeSpec>& attributes);
std::string format_body(const std::vector<Condition>& body, const std::vector<AttributeSpec>& attributes);

}  // namespace mlrules

#include <string>

#include "mlrules/error.hpp"
#include "mlrules/hash.hpp"
#include "mlrules/parallel.hpp"
#include "mlrules/rule.hpp"

namespace mlrules {

std::size_t RulePool::size() const noexcept {
  std::size_t n = 0;
  for (const auto& rules : by_label_) n += rules.size();
  return n;
}

bool RulePool::insert(Rule rule) {
  const auto label = rule.label;
  if (label >= by_label_.size()) throw ConfigError("rule label index out of range for pool");
  if (!seen_[label].insert(rule.body).second) return false;
  by_label_[label].push_back(std::move(rule));
  return true;
}

std::string RulePool::hash() const {
  Fnv1a h;
  for (std::size_t label = 0; label < by_label_.size(); ++label) {
    h.update(static_cast<std::uint64_t>(label));
    h.update(static_cast<std::uint64_t>(by_label_[label].size()));
    for (const auto& rule : by_label_[label]) {
      h.update(static_cast<std::uint64_t>(rule.head));
      h.update(static_cast<std::uint64_t>(rule.body.size()));
      for (const auto& c : rule.body) {
        h.update(static_cast<std::uint64_t>(c.attribute));
        h.update(static_cast<std::uint64_t>(c.op));
        h.update(c.value);
      }
    }
  }
  return h.hex();
}

RulePool generate_candidates(const MultiLabelDataset& dataset, const GenerationConfig& config) {
  if (config.gamma < 1) throw ConfigError("gamma must be a positive integer");
  if (config.min_depth > config.max_depth) throw ConfigError("depth range is empty");
  if (dataset.num_instances() == 0) throw DataError("cannot generate rules from an empty dataset");
  if (dataset.num_labels() == 0) throw DataError("dataset has no labels");
  config.forest.validate(dataset.num_attributes());
  for (const auto& inst : dataset.instances) {
    for (double v : inst.values) {
      if (is_missing(v)) throw DataError("dataset contains missing values; impute before generating rules");
    }
  }

  RulePool pool(dataset.num_labels());
  pool.seed = config.seed;
  pool.gamma = config.gamma;
  pool.dataset_hash = dataset_hash(dataset);

  const std::size_t depths = config.max_depth - config.min_depth + 1;
  const std::size_t cells = dataset.num_labels() * depths;
  std::vector<std::vector<Rule>> cell_rules(cells);
  std::size_t stalled = 0;

  for (std::size_t sweep = 0; pool.size() < config.gamma; ++sweep) {
    if (sweep >= config.max_sweeps) {
      pool.warnings.push_back("stopped after " + std::to_string(sweep) + " sweeps with " +
                              std::to_string(pool.size()) + " rules (gamma " + std::to_string(config.gamma) + ")");
      break;
    }
    const std::uint64_t sweep_seed = derive_seed(config.seed, {sweep});
    parallel_for(cells, config.jobs, [&](std::size_t cell) {
      const std::size_t label = cell / depths;
      ForestConfig forest = config.forest;
      forest.max_depth = config.min_depth + cell % depths;
      forest.seed = sweep_seed;
      const auto trees = train_forest(dataset, label, forest);
      cell_rules[cell] = extract_rules(trees, dataset, label);
    });
    std::size_t added = 0;
    for (auto& rules : cell_rules) {
      for (auto& rule : rules) added += pool.insert(std::move(rule)) ? 1 : 0;
      rules.clear();
    }
    pool.sweeps = sweep + 1;
    if (added == 0) {
      if (++stalled >= config.stall_sweeps) {
        pool.warnings.push_back("no new rules in " + std::to_string(stalled) + " consecutive sweeps; stopped with " +
                                std::to_string(pool.size()) + " rules (gamma " + std::to_string(config.gamma) + ")");
        break;
      }
    } else {
      stalled = 0;
    }
  }

  for (std::size_t label = 0; label < dataset.num_labels(); ++label) {
    if (pool.rules(label).empty()) {
      pool.warnings.push_back("label '" + dataset.label_names[label] + "' has no extractable rules after " +
                              std::to_string(pool.sweeps) + " sweeps");
    }
  }
  return pool;
}

}  // namespace mlrules

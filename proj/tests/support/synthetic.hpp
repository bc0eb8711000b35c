#pragma once

// Small random datasets and rules for property tests and oracles.

#include <cstdint>
#include <string>
#include <vector>

#include "mlrules/dataset.hpp"
#include "mlrules/random.hpp"
#include "mlrules/rule.hpp"

namespace mlrules::synth {

struct SyntheticShape {
  std::size_t instances = 20;
  std::size_t numeric = 3;
  std::size_t nominal = 1;
  std::size_t nominal_values = 3;
  std::size_t labels = 2;
  double positive_rate = 0.3;
};

/// Numeric values are small integers so thresholds and ties are common.
inline MultiLabelDataset synthetic_dataset(const SyntheticShape& shape, Rng& rng) {
  MultiLabelDataset ds;
  ds.relation = "synthetic";
  for (std::size_t a = 0; a < shape.numeric; ++a) ds.attributes.push_back(AttributeSpec::numeric("x" + std::to_string(a)));
  for (std::size_t a = 0; a < shape.nominal; ++a) {
    std::vector<std::string> values;
    for (std::size_t v = 0; v < shape.nominal_values; ++v) values.push_back("v" + std::to_string(v));
    ds.attributes.push_back(AttributeSpec::nominal("c" + std::to_string(a), values));
  }
  for (std::size_t l = 0; l < shape.labels; ++l) ds.label_names.push_back("y" + std::to_string(l));
  ds.labels = LabelMatrix(0, shape.labels);
  for (std::size_t j = 0; j < shape.instances; ++j) {
    Instance inst;
    for (std::size_t a = 0; a < shape.numeric; ++a) inst.values.push_back(static_cast<double>(rng.uniform_index(6)));
    for (std::size_t a = 0; a < shape.nominal; ++a) {
      inst.values.push_back(static_cast<double>(rng.uniform_index(shape.nominal_values)));
    }
    std::vector<std::uint8_t> row(shape.labels);
    for (std::size_t l = 0; l < shape.labels; ++l) {
      // tie labels loosely to x0 so trees find structure
      const double bias = inst.values.empty() ? 0.0 : (inst.values[0] >= 3 ? 0.25 : -0.15);
      row[l] = rng.uniform01() < shape.positive_rate + bias * static_cast<double>(l % 2 == 0) ? 1 : 0;
    }
    ds.instances.push_back(std::move(inst));
    ds.labels.append_row(row);
  }
  ds.minority = compute_minority_classes(ds.labels);
  return ds;
}

/// Random normalized rule for `label` over the dataset's attributes.
inline Rule random_rule(const MultiLabelDataset& ds, std::size_t label, Rng& rng, std::size_t max_conditions = 3) {
  for (;;) {
    std::vector<Condition> body;
    const std::size_t n = rng.uniform_index(max_conditions + 1);
    for (std::size_t k = 0; k < n; ++k) {
      const auto a = static_cast<std::uint32_t>(rng.uniform_index(ds.num_attributes()));
      const auto& spec = ds.attributes[a];
      if (spec.is_nominal()) {
        body.push_back({a, rng.uniform_index(3) == 0 ? Op::neq : Op::eq,
                        static_cast<double>(rng.uniform_index(spec.values.size()))});
      } else {
        body.push_back({a, rng.uniform_index(2) ? Op::lt : Op::ge, static_cast<double>(rng.uniform_index(6)) + 0.5});
      }
    }
    auto normalized = normalize_body(body);
    if (!normalized) continue;
    return Rule{std::move(*normalized), static_cast<std::uint32_t>(label), ds.minority[label]};
  }
}

}  // namespace mlrules::synth

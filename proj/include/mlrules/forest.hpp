#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mlrules/dataset.hpp"
#include "mlrules/random.hpp"

namespace mlrules {

/// floor(log2(l - 1)) + 1, and 1 when l <= 2.
std::size_t default_attribute_sample(std::size_t attribute_count) noexcept;

struct ForestConfig {
  std::size_t tree_count = 10;
  std::size_t max_depth = 0;         // 0 = unrestricted
  double bag_fraction = 1.0;         // bag holds ceil(m * bag_fraction) draws with replacement
  std::size_t attribute_sample = 0;  // K; 0 selects default_attribute_sample(l)
  std::uint64_t seed = 0;

  std::size_t resolved_attribute_sample(std::size_t attribute_count) const;
  /// Throws ConfigError when the configuration is unusable for l attributes.
  void validate(std::size_t attribute_count) const;
};

enum class SplitKind : std::uint8_t {
  nominal_equals,  // left: attribute = value, right: attribute != value
  numeric_less,    // left: attribute < value, right: attribute >= value
};

struct TreeNode {
  bool leaf = true;
  // internal nodes
  std::uint32_t attribute = 0;
  SplitKind kind = SplitKind::numeric_less;
  double value = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // leaves
  std::uint8_t predicted = 0;
  std::array<double, 2> support{0.0, 0.0};  // bag counts per class
};

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t label = 0;
  std::size_t depth_cap = 0;
  std::uint8_t minority = 1;
  std::vector<std::size_t> bag;  // training rows drawn for this tree (with repeats)

  /// Index of the leaf an instance is routed to.
  std::size_t route(const Instance& instance) const;
  /// Longest root-to-leaf path in edges.
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

/// Whether `left` branch of an internal node accepts the value.
bool goes_left(const TreeNode& node, double value) noexcept;

DecisionTree train_tree(const MultiLabelDataset& dataset, std::size_t label, const ForestConfig& config,
                        Rng& rng);

/// config.tree_count trees; tree t uses the stream derive_seed(seed, {label, depth, t}).
std::vector<DecisionTree> train_forest(const MultiLabelDataset& dataset, std::size_t label,
                                       const ForestConfig& config);

/// Indented text rendering, for debugging only.
std::string dump_tree(const DecisionTree& tree, const MultiLabelDataset& dataset);

}  // namespace mlrules

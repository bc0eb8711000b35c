#include "mlrules/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mlrules/error.hpp"

namespace mlrules {
namespace {

// Splits must improve on the parent's entropy by more than this.
constexpr double kMinGain = 1e-10;
constexpr double kGainTie = 1e-12;

double entropy(double n0, double n1) noexcept {
  const double n = n0 + n1;
  if (n <= 0.0) return 0.0;
  double h = 0.0;
  if (n0 > 0.0) h -= (n0 / n) * std::log2(n0 / n);
  if (n1 > 0.0) h -= (n1 / n) * std::log2(n1 / n);
  return h;
}

struct SplitCandidate {
  bool valid = false;
  double gain = 0.0;
  std::uint32_t attribute = 0;
  SplitKind kind = SplitKind::numeric_less;
  double value = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const MultiLabelDataset& ds, std::size_t label, std::size_t depth_cap, std::size_t k, Rng& rng)
      : ds_(ds), label_(label), depth_cap_(depth_cap), k_(k), rng_(rng), order_(ds.num_attributes()) {
    std::iota(order_.begin(), order_.end(), 0);
  }

  DecisionTree build(std::vector<std::size_t> bag) {
    DecisionTree tree;
    tree.label = label_;
    tree.depth_cap = depth_cap_;
    tree.minority = ds_.minority.at(label_);
    tree.bag = bag;

    struct Pending {
      std::size_t node;
      std::vector<std::size_t> rows;
      std::size_t depth;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(bag), 0});
    while (!stack.empty()) {
      Pending work = std::move(stack.back());
      stack.pop_back();

      double n1 = 0.0;
      for (auto r : work.rows) n1 += ds_.labels.at(r, label_);
      const double n0 = static_cast<double>(work.rows.size()) - n1;

      const bool capped = depth_cap_ > 0 && work.depth >= depth_cap_;
      SplitCandidate split;
      if (!capped && n0 > 0.0 && n1 > 0.0) split = best_split(work.rows, n0, n1);

      if (!split.valid) {
        TreeNode& leaf = tree.nodes[work.node];
        leaf.leaf = true;
        leaf.support = {n0, n1};
        leaf.predicted = n1 > n0 ? 1 : (n0 > n1 ? 0 : tree.minority);
        continue;
      }

      std::vector<std::size_t> left_rows;
      std::vector<std::size_t> right_rows;
      for (auto r : work.rows) {
        TreeNode probe;
        probe.kind = split.kind;
        probe.value = split.value;
        (goes_left(probe, ds_.instances[r].values[split.attribute]) ? left_rows : right_rows).push_back(r);
      }
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      const auto right = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[work.node];
      node.leaf = false;
      node.attribute = split.attribute;
      node.kind = split.kind;
      node.value = split.value;
      node.left = left;
      node.right = right;
      // right pushed first so the left subtree is grown first
      stack.push_back({static_cast<std::size_t>(right), std::move(right_rows), work.depth + 1});
      stack.push_back({static_cast<std::size_t>(left), std::move(left_rows), work.depth + 1});
    }
    return tree;
  }

 private:
  /// Draws attributes without replacement; after K draws, keeps drawing only
  /// until some attribute yields a positive gain.
  SplitCandidate best_split(const std::vector<std::size_t>& rows, double n0, double n1) {
    const double parent = entropy(n0, n1);
    const std::size_t l = order_.size();
    SplitCandidate best;
    for (std::size_t j = 0; j < l; ++j) {
      std::swap(order_[j], order_[j + rng_.uniform_index(l - j)]);
      const auto attribute = static_cast<std::uint32_t>(order_[j]);
      SplitCandidate cand = ds_.attributes[attribute].is_nominal()
                                ? nominal_split(rows, attribute, parent)
                                : numeric_split(rows, attribute, parent);
      if (cand.valid && cand.gain > kMinGain) {
        const bool better = !best.valid || cand.gain > best.gain + kGainTie ||
                            (std::abs(cand.gain - best.gain) <= kGainTie && cand.attribute < best.attribute);
        if (better) best = cand;
      }
      if (j + 1 >= k_ && best.valid) break;
    }
    return best;
  }

  SplitCandidate numeric_split(const std::vector<std::size_t>& rows, std::uint32_t attribute, double parent) {
    scratch_.clear();
    for (auto r : rows) scratch_.emplace_back(ds_.instances[r].values[attribute], ds_.labels.at(r, label_));
    std::sort(scratch_.begin(), scratch_.end());
    const double n = static_cast<double>(scratch_.size());
    double total1 = 0.0;
    for (const auto& [v, y] : scratch_) total1 += y;
    const double total0 = n - total1;

    SplitCandidate best;
    double left0 = 0.0;
    double left1 = 0.0;
    for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
      (scratch_[i].second ? left1 : left0) += 1.0;
      const double a = scratch_[i].first;
      const double b = scratch_[i + 1].first;
      if (!(a < b)) continue;
      const double nl = left0 + left1;
      const double gain = parent - (nl / n) * entropy(left0, left1) -
                          ((n - nl) / n) * entropy(total0 - left0, total1 - left1);
      if (!best.valid || gain > best.gain + kGainTie) {
        double threshold = a + (b - a) / 2.0;
        if (!(a < threshold && threshold <= b)) threshold = b;
        best = {true, gain, attribute, SplitKind::numeric_less, threshold};
      }
    }
    return best;
  }

  SplitCandidate nominal_split(const std::vector<std::size_t>& rows, std::uint32_t attribute, double parent) {
    const std::size_t arity = ds_.attributes[attribute].values.size();
    counts_.assign(2 * arity, 0.0);
    for (auto r : rows) {
      const auto v = static_cast<std::size_t>(ds_.instances[r].values[attribute]);
      counts_[2 * v + ds_.labels.at(r, label_)] += 1.0;
    }
    double total0 = 0.0;
    double total1 = 0.0;
    for (std::size_t v = 0; v < arity; ++v) {
      total0 += counts_[2 * v];
      total1 += counts_[2 * v + 1];
    }
    const double n = total0 + total1;
    SplitCandidate best;
    for (std::size_t v = 0; v < arity; ++v) {
      const double in0 = counts_[2 * v];
      const double in1 = counts_[2 * v + 1];
      const double nin = in0 + in1;
      if (nin <= 0.0 || nin >= n) continue;
      const double gain =
          parent - (nin / n) * entropy(in0, in1) - ((n - nin) / n) * entropy(total0 - in0, total1 - in1);
      if (!best.valid || gain > best.gain + kGainTie) {
        best = {true, gain, attribute, SplitKind::nominal_equals, static_cast<double>(v)};
      }
      // binary attributes: "= second value" is the mirror of "= first value"
      if (arity == 2) break;
    }
    return best;
  }

  const MultiLabelDataset& ds_;
  std::size_t label_;
  std::size_t depth_cap_;
  std::size_t k_;
  Rng& rng_;
  std::vector<std::size_t> order_;
  std::vector<std::pair<double, std::uint8_t>> scratch_;
  std::vector<double> counts_;
};

}  // namespace

std::size_t default_attribute_sample(std::size_t attribute_count) noexcept {
  if (attribute_count <= 2) return 1;
  return static_cast<std::size_t>(std::bit_width(attribute_count - 1));
}

std::size_t ForestConfig::resolved_attribute_sample(std::size_t attribute_count) const {
  if (attribute_sample != 0) return attribute_sample;
  return std::min(default_attribute_sample(attribute_count), std::max<std::size_t>(attribute_count, 1));
}

void ForestConfig::validate(std::size_t attribute_count) const {
  if (tree_count < 1) throw ConfigError("forest: tree count must be at least 1");
  if (!(bag_fraction > 0.0) || !std::isfinite(bag_fraction)) {
    throw ConfigError("forest: bag fraction must be a positive finite number");
  }
  if (attribute_sample > attribute_count) {
    throw ConfigError("forest: attribute sample size " + std::to_string(attribute_sample) +
                      " exceeds attribute count " + std::to_string(attribute_count));
  }
}

bool goes_left(const TreeNode& node, double value) noexcept {
  return node.kind == SplitKind::numeric_less ? value < node.value : value == node.value;
}

std::size_t DecisionTree::route(const Instance& instance) const {
  std::size_t i = 0;
  while (!nodes[i].leaf) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(goes_left(n, instance.values[n.attribute]) ? n.left : n.right);
  }
  return i;
}

std::size_t DecisionTree::depth() const {
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].leaf) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

DecisionTree train_tree(const MultiLabelDataset& dataset, std::size_t label, const ForestConfig& config,
                        Rng& rng) {
  if (dataset.num_instances() == 0) throw DataError("cannot train a tree on an empty dataset");
  if (label >= dataset.num_labels()) throw ConfigError("label index " + std::to_string(label) + " out of range");
  config.validate(dataset.num_attributes());

  const std::size_t m = dataset.num_instances();
  const auto bag_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(static_cast<double>(m) * config.bag_fraction)));
  std::vector<std::size_t> bag(bag_size);
  for (auto& r : bag) r = rng.uniform_index(m);

  TreeBuilder builder(dataset, label, config.max_depth, config.resolved_attribute_sample(dataset.num_attributes()),
                      rng);
  return builder.build(std::move(bag));
}

std::vector<DecisionTree> train_forest(const MultiLabelDataset& dataset, std::size_t label,
                                       const ForestConfig& config) {
  config.validate(dataset.num_attributes());
  std::vector<DecisionTree> forest;
  forest.reserve(config.tree_count);
  for (std::size_t t = 0; t < config.tree_count; ++t) {
    Rng rng(derive_seed(config.seed, {label, config.max_depth, t}));
    forest.push_back(train_tree(dataset, label, config, rng));
  }
  return forest;
}

std::string dump_tree(const DecisionTree& tree, const MultiLabelDataset& dataset) {
  std::ostringstream os;
  struct Item {
    std::size_t node;
    std::size_t indent;
    std::string prefix;
  };
  std::vector<Item> stack{{0, 0, "root"}};
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    const auto& n = tree.nodes[item.node];
    os << std::string(2 * item.indent, ' ') << item.prefix;
    if (n.leaf) {
      os << " -> " << static_cast<int>(n.predicted) << " [" << n.support[0] << "/" << n.support[1] << "]\n";
      continue;
    }
    os << '\n';
    const auto& attr = dataset.attributes[n.attribute];
    std::string yes;
    std::string no;
    if (n.kind == SplitKind::nominal_equals) {
      const auto& v = attr.values[static_cast<std::size_t>(n.value)];
      yes = attr.name + " = " + v;
      no = attr.name + " != " + v;
    } else {
      std::ostringstream t;
      t << n.value;
      yes = attr.name + " < " + t.str();
      no = attr.name + " >= " + t.str();
    }
    stack.push_back({static_cast<std::size_t>(n.right), item.indent + 1, no});
    stack.push_back({static_cast<std::size_t>(n.left), item.indent + 1, yes});
  }
  return os.str();
}

}  // namespace mlrules

#include "mlrules/rule.hpp"

#include <algorithm>

namespace mlrules {

const char* op_symbol(Op op) noexcept {
  switch (op) {
    case Op::eq: return "=";
    case Op::neq: return "!=";
    case Op::ge: return ">=";
    case Op::lt: return "<";
  }
  return "?";
}

bool covers(const Rule& rule, const Instance& instance) noexcept {
  for (const auto& c : rule.body) {
    if (!c.holds(instance.values[c.attribute])) return false;
  }
  return true;
}

std::optional<std::vector<Condition>> normalize_body(std::vector<Condition> conditions) {
  std::sort(conditions.begin(), conditions.end());
  std::vector<Condition> out;
  out.reserve(conditions.size());
  std::size_t i = 0;
  while (i < conditions.size()) {
    const auto attribute = conditions[i].attribute;
    std::optional<double> equals;
    std::vector<double> not_equals;
    std::optional<double> lower;  // x >= lower
    std::optional<double> upper;  // x < upper
    for (; i < conditions.size() && conditions[i].attribute == attribute; ++i) {
      const auto& c = conditions[i];
      switch (c.op) {
        case Op::eq:
          if (equals && *equals != c.value) return std::nullopt;
          equals = c.value;
          break;
        case Op::neq:
          if (not_equals.empty() || not_equals.back() != c.value) not_equals.push_back(c.value);
          break;
        case Op::ge:
          lower = lower ? std::max(*lower, c.value) : c.value;
          break;
        case Op::lt:
          upper = upper ? std::min(*upper, c.value) : c.value;
          break;
      }
    }
    if (equals) {
      if (std::find(not_equals.begin(), not_equals.end(), *equals) != not_equals.end()) return std::nullopt;
      out.push_back({attribute, Op::eq, *equals});
    } else {
      for (double v : not_equals) out.push_back({attribute, Op::neq, v});
    }
    if (lower && upper && !(*lower < *upper)) return std::nullopt;
    if (lower) out.push_back({attribute, Op::ge, *lower});
    if (upper) out.push_back({attribute, Op::lt, *upper});
  }
  return out;
}

std::vector<Condition> path_conditions(const DecisionTree& tree, std::size_t leaf) {
  std::vector<std::int32_t> parent(tree.nodes.size(), -1);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    if (!n.leaf) {
      parent[static_cast<std::size_t>(n.left)] = static_cast<std::int32_t>(i);
      parent[static_cast<std::size_t>(n.right)] = static_cast<std::int32_t>(i);
    }
  }
  std::vector<Condition> out;
  auto child = static_cast<std::int32_t>(leaf);
  while (parent[static_cast<std::size_t>(child)] >= 0) {
    const auto p = parent[static_cast<std::size_t>(child)];
    const auto& n = tree.nodes[static_cast<std::size_t>(p)];
    const bool left = n.left == child;
    Op op;
    if (n.kind == SplitKind::nominal_equals) {
      op = left ? Op::eq : Op::neq;
    } else {
      op = left ? Op::lt : Op::ge;
    }
    out.push_back({n.attribute, op, n.value});
    child = p;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

/// Walks a tree collecting the rule body of every minority-class leaf.
void collect_paths(const DecisionTree& tree, std::vector<std::vector<Condition>>& bodies) {
  std::vector<Condition> path;
  // DFS; each item carries the condition on the edge into it
  struct Item {
    std::size_t node;
    std::size_t depth;
    Condition edge;
    bool has_edge;
  };
  std::vector<Item> work{{0, 0, {}, false}};
  while (!work.empty()) {
    Item item = work.back();
    work.pop_back();
    path.resize(item.depth > 0 ? item.depth - 1 : 0);
    if (item.has_edge) path.push_back(item.edge);
    const auto& n = tree.nodes[item.node];
    if (n.leaf) {
      if (n.predicted == tree.minority) bodies.push_back(path);
      continue;
    }
    const bool nominal = n.kind == SplitKind::nominal_equals;
    work.push_back({static_cast<std::size_t>(n.right), item.depth + 1, {n.attribute, nominal ? Op::neq : Op::ge, n.value}, true});
    work.push_back({static_cast<std::size_t>(n.left), item.depth + 1, {n.attribute, nominal ? Op::eq : Op::lt, n.value}, true});
  }
}

}  // namespace

std::vector<Rule> extract_rules(std::span<const DecisionTree> forest, const MultiLabelDataset& dataset,
                                std::size_t label) {
  const std::uint8_t head = dataset.minority.at(label);
  std::vector<Rule> out;
  std::set<std::vector<Condition>> seen;
  std::vector<std::vector<Condition>> bodies;
  for (const auto& tree : forest) {
    bodies.clear();
    collect_paths(tree, bodies);
    for (auto& body : bodies) {
      auto normalized = normalize_body(std::move(body));
      if (!normalized) continue;
      if (!seen.insert(*normalized).second) continue;
      out.push_back(Rule{std::move(*normalized), static_cast<std::uint32_t>(label), head});
    }
  }
  return out;
}

}  // namespace mlrules

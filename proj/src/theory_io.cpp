#include <algorithm>
#include <unordered_map>

#include "json.hpp"
#include "mlrules/error.hpp"
#include "mlrules/theory.hpp"

namespace mlrules {
namespace {

using nlohmann::json;

constexpr int kModelFormatVersion = 1;

Op parse_op(const std::string& s) {
  if (s == "=") return Op::eq;
  if (s == "!=") return Op::neq;
  if (s == ">=") return Op::ge;
  if (s == "<") return Op::lt;
  throw ParseError("model JSON: unknown operator '" + s + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string theory_to_json(const Theory& theory) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = "mlrules.model";
  doc["heuristic"] = theory.spec.to_string();
  doc["retention"] = theory.retention;
  doc["scope"] = theory.scope == ThresholdScope::pooled ? "pooled" : "per_label";
  doc["threshold"] = optional_number(theory.threshold);
  doc["selected_rules"] = theory.selected_rules;
  doc["provenance"] = {{"seed", theory.provenance.seed},
                       {"gamma", theory.provenance.gamma},
                       {"dataset_hash", theory.provenance.dataset_hash},
                       {"pool_hash", theory.provenance.pool_hash}};
  json attrs = json::array();
  for (const auto& a : theory.attributes) {
    json entry{{"name", a.name}, {"kind", a.is_nominal() ? "nominal" : "numeric"}};
    if (a.is_nominal()) entry["values"] = a.values;
    attrs.push_back(std::move(entry));
  }
  doc["attributes"] = std::move(attrs);
  json labels = json::array();
  for (const auto& lt : theory.labels) {
    json rules = json::array();
    for (const auto& r : lt.rules) {
      json body = json::array();
      for (const auto& c : r.rule.body) {
        const auto& a = theory.attributes.at(c.attribute);
        json value = a.is_nominal() ? json(a.values.at(static_cast<std::size_t>(c.value))) : json(c.value);
        body.push_back({{"attribute", a.name}, {"op", op_symbol(c.op)}, {"value", std::move(value)}});
      }
      rules.push_back({{"score", r.score}, {"selection_score", r.selection_score}, {"body", std::move(body)}});
    }
    json entry{{"index", lt.label},
               {"name", theory.label_names.at(lt.label)},
               {"minority", lt.minority},
               {"inverted", std::find(theory.inverted.begin(), theory.inverted.end(), lt.label) !=
                                theory.inverted.end()},
               {"rules", std::move(rules)}};
    if (theory.scope == ThresholdScope::per_label) {
      entry["threshold"] = lt.label < theory.label_thresholds.size() ? optional_number(theory.label_thresholds[lt.label])
                                                                     : json(nullptr);
    }
    labels.push_back(std::move(entry));
  }
  doc["labels"] = std::move(labels);
  doc["warnings"] = theory.warnings;
  return doc.dump(1) + "\n";
}

Theory theory_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  try {
    if (doc.at("kind").get<std::string>() != "mlrules.model") throw ParseError("model JSON: not a model document");
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
      throw ParseError("model JSON: unsupported format_version");
    }
    Theory t;
    try {
      t.spec = HeuristicSpec::parse(doc.at("heuristic").get<std::string>());
    } catch (const ConfigError& e) {
      throw ParseError(std::string("model JSON: ") + e.what());
    }
    t.retention = doc.at("retention").get<double>();
    const auto scope = doc.at("scope").get<std::string>();
    if (scope == "pooled") t.scope = ThresholdScope::pooled;
    else if (scope == "per_label") t.scope = ThresholdScope::per_label;
    else throw ParseError("model JSON: unknown scope '" + scope + "'");
    t.threshold = read_optional(doc.at("threshold"));
    t.selected_rules = doc.at("selected_rules").get<std::size_t>();
    const auto& prov = doc.at("provenance");
    t.provenance = {prov.at("seed").get<std::uint64_t>(), prov.at("gamma").get<std::size_t>(),
                    prov.at("dataset_hash").get<std::string>(), prov.at("pool_hash").get<std::string>()};

    std::unordered_map<std::string, std::size_t> attr_index;
    for (const auto& a : doc.at("attributes")) {
      const auto name = a.at("name").get<std::string>();
      const auto kind = a.at("kind").get<std::string>();
      if (kind == "numeric") {
        t.attributes.push_back(AttributeSpec::numeric(name));
      } else if (kind == "nominal") {
        t.attributes.push_back(AttributeSpec::nominal(name, a.at("values").get<std::vector<std::string>>()));
      } else {
        throw ParseError("model JSON: unknown attribute kind '" + kind + "'");
      }
      if (!attr_index.emplace(name, t.attributes.size() - 1).second) {
        throw ParseError("model JSON: duplicate attribute '" + name + "'");
      }
    }

    const auto& labels = doc.at("labels");
    t.labels.resize(labels.size());
    t.label_names.resize(labels.size());
    if (t.scope == ThresholdScope::per_label) t.label_thresholds.assign(labels.size(), std::nullopt);
    for (const auto& entry : labels) {
      const auto index = entry.at("index").get<std::size_t>();
      if (index >= labels.size()) throw ParseError("model JSON: label index out of range");
      auto& lt = t.labels[index];
      lt.label = index;
      lt.minority = entry.at("minority").get<std::uint8_t>();
      t.label_names[index] = entry.at("name").get<std::string>();
      if (entry.at("inverted").get<bool>()) t.inverted.push_back(index);
      if (t.scope == ThresholdScope::per_label) t.label_thresholds[index] = read_optional(entry.at("threshold"));
      for (const auto& r : entry.at("rules")) {
        ScoredRule sr;
        sr.score = r.at("score").get<double>();
        sr.selection_score = r.at("selection_score").get<double>();
        sr.rule.label = static_cast<std::uint32_t>(index);
        sr.rule.head = lt.minority;
        for (const auto& c : r.at("body")) {
          const auto name = c.at("attribute").get<std::string>();
          const auto it = attr_index.find(name);
          if (it == attr_index.end()) throw ParseError("model JSON: unknown attribute '" + name + "'");
          const auto& spec = t.attributes[it->second];
          Condition cond;
          cond.attribute = static_cast<std::uint32_t>(it->second);
          cond.op = parse_op(c.at("op").get<std::string>());
          if (spec.is_nominal()) {
            const auto idx = spec.value_index(c.at("value").get<std::string>());
            if (!idx) throw ParseError("model JSON: unknown value for '" + name + "'");
            cond.value = static_cast<double>(*idx);
          } else {
            cond.value = c.at("value").get<double>();
          }
          sr.rule.body.push_back(cond);
        }
        lt.rules.push_back(std::move(sr));
      }
    }
    std::sort(t.inverted.begin(), t.inverted.end());
    t.warnings = doc.value("warnings", std::vector<std::string>{});
    return t;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

void check_compatible(const Theory& theory, const MultiLabelDataset& dataset) {
  if (theory.attributes != dataset.attributes) {
    throw ConfigError("dataset attributes do not match the model's attribute list");
  }
  if (theory.label_names != dataset.label_names) {
    throw ConfigError("dataset labels do not match the model's labels");
  }
  if (theory.inverted != dataset.inverted) {
    throw ConfigError("dataset label inversion differs from the model's; preprocess both the same way");
  }
}

}  // namespace mlrules

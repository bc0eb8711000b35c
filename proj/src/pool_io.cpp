#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "mlrules/error.hpp"
#include "mlrules/rule.hpp"

namespace mlrules {
namespace {

constexpr int kPoolFormatVersion = 1;
constexpr std::string_view kAnd = " \xE2\x88\xA7 ";  // " ∧ "

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // shortest representation that still round-trips
  for (int precision = 1; precision < 17; ++precision) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", precision, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

bool plain(std::string_view s) {
  if (s.empty()) return false;
  for (unsigned char c : s) {
    if (std::isspace(c) || c == '\'' || c == '"' || c == '\\' || c == '<' || c == '>' || c == '=' || c == '!' ||
        c == ',' || c == '#') {
      return false;
    }
  }
  return s.find("\xE2\x88\xA7") == std::string_view::npos;
}

std::string quote_name(std::string_view s) {
  if (plain(s)) return std::string(s);
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  return out + "'";
}

/// Reads a name that is either plain (up to whitespace) or single-quoted.
std::string read_name(std::string_view s, std::size_t& pos, std::size_t line) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos >= s.size()) throw ParseError(line, "expected a name");
  std::string out;
  if (s[pos] == '\'') {
    ++pos;
    while (pos < s.size() && s[pos] != '\'') {
      if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
      out += s[pos++];
    }
    if (pos >= s.size()) throw ParseError(line, "unterminated quoted name");
    ++pos;
    return out;
  }
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) out += s[pos++];
  return out;
}

}  // namespace

std::string format_condition(const Condition& c, const std::vector<AttributeSpec>& attributes) {
  const auto& attr = attributes.at(c.attribute);
  std::string value = attr.is_nominal() ? quote_name(attr.values.at(static_cast<std::size_t>(c.value))) : number(c.value);
  return quote_name(attr.name) + " " + op_symbol(c.op) + " " + value;
}

std::string format_body(const std::vector<Condition>& body, const std::vector<AttributeSpec>& attributes) {
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (i) out += kAnd;
    out += format_condition(body[i], attributes);
  }
  return out;
}

std::string pool_to_text(const RulePool& pool, const MultiLabelDataset& dataset) {
  std::ostringstream os;
  os << "# mlrules rule pool\n";
  os << "# format_version: " << kPoolFormatVersion << '\n';
  os << "# dataset_hash: " << pool.dataset_hash << '\n';
  os << "# seed: " << pool.seed << '\n';
  os << "# gamma: " << pool.gamma << '\n';
  os << "# sweeps: " << pool.sweeps << '\n';
  for (std::size_t label = 0; label < pool.label_count(); ++label) {
    for (const auto& rule : pool.rules(label)) {
      os << quote_name(dataset.label_names.at(label)) << " <-";
      if (!rule.body.empty()) os << ' ' << format_body(rule.body, dataset.attributes);
      os << '\n';
    }
  }
  return os.str();
}

RulePool pool_from_text(std::string_view text, const MultiLabelDataset& dataset) {
  RulePool pool(dataset.num_labels());
  std::unordered_map<std::string, std::size_t> attr_index;
  for (std::size_t a = 0; a < dataset.num_attributes(); ++a) attr_index.emplace(dataset.attributes[a].name, a);
  std::unordered_map<std::string, std::size_t> label_index;
  for (std::size_t l = 0; l < dataset.num_labels(); ++l) label_index.emplace(dataset.label_names[l], l);

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool saw_version = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string value = line.substr(line.find_first_not_of(' ', colon + 1) == std::string::npos
                                                ? line.size()
                                                : line.find_first_not_of(' ', colon + 1));
      if (key == "format_version") {
        if (std::atoi(value.c_str()) != kPoolFormatVersion) {
          throw ParseError(line_no, "unsupported pool format_version " + value);
        }
        saw_version = true;
      } else if (key == "dataset_hash") {
        pool.dataset_hash = value;
      } else if (key == "seed") {
        pool.seed = std::strtoull(value.c_str(), nullptr, 10);
      } else if (key == "gamma") {
        pool.gamma = std::strtoull(value.c_str(), nullptr, 10);
      } else if (key == "sweeps") {
        pool.sweeps = std::strtoull(value.c_str(), nullptr, 10);
      }
      continue;
    }
    std::string_view rest(line);
    std::size_t pos = 0;
    const auto label_name = read_name(rest, pos, line_no);
    const auto label = label_index.find(label_name);
    if (label == label_index.end()) throw ParseError(line_no, "unknown label '" + label_name + "'");
    while (pos < rest.size() && rest[pos] == ' ') ++pos;
    if (rest.substr(pos, 2) != "<-") throw ParseError(line_no, "expected '<-'");
    pos += 2;

    std::vector<Condition> body;
    while (true) {
      while (pos < rest.size() && rest[pos] == ' ') ++pos;
      if (pos >= rest.size()) break;
      if (!body.empty()) {
        const auto sep = kAnd.substr(1);
        if (rest.substr(pos, sep.size()) != sep) throw ParseError(line_no, "expected '\xE2\x88\xA7' between conditions");
        pos += sep.size();
      }
      const auto attr_name = read_name(rest, pos, line_no);
      const auto attr = attr_index.find(attr_name);
      if (attr == attr_index.end()) throw ParseError(line_no, "unknown attribute '" + attr_name + "'");
      const auto op_text = read_name(rest, pos, line_no);
      Condition c;
      c.attribute = static_cast<std::uint32_t>(attr->second);
      if (op_text == "=") c.op = Op::eq;
      else if (op_text == "!=") c.op = Op::neq;
      else if (op_text == ">=") c.op = Op::ge;
      else if (op_text == "<") c.op = Op::lt;
      else throw ParseError(line_no, "unknown operator '" + op_text + "'");
      const auto value_text = read_name(rest, pos, line_no);
      const auto& spec = dataset.attributes[attr->second];
      const bool nominal_op = c.op == Op::eq || c.op == Op::neq;
      if (nominal_op != spec.is_nominal()) {
        throw ParseError(line_no, "operator '" + op_text + "' does not match the kind of '" + spec.name + "'");
      }
      if (spec.is_nominal()) {
        const auto idx = spec.value_index(value_text);
        if (!idx) throw ParseError(line_no, "unknown value '" + value_text + "' for '" + spec.name + "'");
        c.value = static_cast<double>(*idx);
      } else {
        char* end = nullptr;
        c.value = std::strtod(value_text.c_str(), &end);
        if (end != value_text.c_str() + value_text.size()) {
          throw ParseError(line_no, "invalid threshold '" + value_text + "'");
        }
      }
      body.push_back(c);
    }
    auto normalized = normalize_body(std::move(body));
    if (!normalized) throw ParseError(line_no, "contradictory rule body");
    pool.insert(Rule{std::move(*normalized), static_cast<std::uint32_t>(label->second), dataset.minority.at(label->second)});
  }
  if (!saw_version) throw ParseError("pool listing has no format_version header");
  return pool;
}

std::string pool_to_json(const RulePool& pool, const MultiLabelDataset& dataset) {
  using nlohmann::json;
  json doc;
  doc["format_version"] = kPoolFormatVersion;
  doc["kind"] = "mlrules.pool";
  doc["dataset_hash"] = pool.dataset_hash;
  doc["seed"] = pool.seed;
  doc["gamma"] = pool.gamma;
  doc["sweeps"] = pool.sweeps;
  doc["size"] = pool.size();
  doc["warnings"] = pool.warnings;
  json labels = json::array();
  for (std::size_t label = 0; label < pool.label_count(); ++label) {
    json rules = json::array();
    for (const auto& rule : pool.rules(label)) {
      json body = json::array();
      for (const auto& c : rule.body) body.push_back(json::array({c.attribute, op_symbol(c.op), c.value}));
      rules.push_back(json{{"head", rule.head}, {"body", std::move(body)}});
    }
    labels.push_back(json{{"index", label}, {"name", dataset.label_names.at(label)}, {"rules", std::move(rules)}});
  }
  doc["labels"] = std::move(labels);
  return doc.dump(1) + "\n";
}

RulePool pool_from_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("pool JSON: ") + e.what());
  }
  try {
    if (doc.at("kind").get<std::string>() != "mlrules.pool") throw ParseError("pool JSON: not a rule pool document");
    if (doc.at("format_version").get<int>() != kPoolFormatVersion) {
      throw ParseError("pool JSON: unsupported format_version");
    }
    const auto& labels = doc.at("labels");
    RulePool pool(labels.size());
    pool.dataset_hash = doc.at("dataset_hash").get<std::string>();
    pool.seed = doc.at("seed").get<std::uint64_t>();
    pool.gamma = doc.at("gamma").get<std::size_t>();
    pool.sweeps = doc.at("sweeps").get<std::size_t>();
    pool.warnings = doc.value("warnings", std::vector<std::string>{});
    for (const auto& entry : labels) {
      const auto label = entry.at("index").get<std::uint32_t>();
      for (const auto& r : entry.at("rules")) {
        Rule rule;
        rule.label = label;
        rule.head = r.at("head").get<std::uint8_t>();
        for (const auto& c : r.at("body")) {
          Condition cond;
          cond.attribute = c.at(0).get<std::uint32_t>();
          const auto op = c.at(1).get<std::string>();
          if (op == "=") cond.op = Op::eq;
          else if (op == "!=") cond.op = Op::neq;
          else if (op == ">=") cond.op = Op::ge;
          else if (op == "<") cond.op = Op::lt;
          else throw ParseError("pool JSON: unknown operator '" + op + "'");
          cond.value = c.at(2).get<double>();
          rule.body.push_back(cond);
        }
        pool.insert(std::move(rule));
      }
    }
    return pool;
  } catch (const json::exception& e) {
    throw ParseError(std::string("pool JSON: ") + e.what());
  }
}

}  // namespace mlrules

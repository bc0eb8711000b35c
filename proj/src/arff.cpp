// ARFF reader: dense and sparse rows, '%' comments, case-insensitive keywords.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mlrules/dataset.hpp"
#include "mlrules/error.hpp"

namespace mlrules {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool starts_with_keyword(std::string_view line, std::string_view keyword) {
  if (line.size() < keyword.size()) return false;
  if (lower(line.substr(0, keyword.size())) != keyword) return false;
  return line.size() == keyword.size() ||
         std::isspace(static_cast<unsigned char>(line[keyword.size()]));
}

/// Reads one possibly-quoted token starting at `pos`; stops at whitespace or
/// any char in `stops` when unquoted. Advances pos past the token.
std::string read_token(std::string_view s, std::size_t& pos, std::string_view stops, std::size_t line) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos >= s.size()) throw ParseError(line, "unexpected end of line");
  std::string out;
  const char q = s[pos];
  if (q == '\'' || q == '"') {
    ++pos;
    while (pos < s.size() && s[pos] != q) {
      if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
      out += s[pos++];
    }
    if (pos >= s.size()) throw ParseError(line, "unterminated quoted string");
    ++pos;
    return out;
  }
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) &&
         stops.find(s[pos]) == std::string_view::npos) {
    out += s[pos++];
  }
  return out;
}

/// Splits a comma-separated list honouring quotes; tokens are unquoted and trimmed.
std::vector<std::string> split_values(std::string_view s, std::size_t line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos >= s.size()) throw ParseError(line, "empty value in list");
    if (s[pos] == '\'' || s[pos] == '"') {
      out.push_back(read_token(s, pos, ",", line));
    } else {
      std::size_t end = s.find(',', pos);
      if (end == std::string_view::npos) end = s.size();
      const auto token = trim(s.substr(pos, end - pos));
      if (token.empty()) throw ParseError(line, "empty value in list");
      out.emplace_back(token);
      pos = end;
    }
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos >= s.size()) break;
    if (s[pos] != ',') throw ParseError(line, "expected ',' in value list");
    ++pos;
  }
  return out;
}

struct RawAttribute {
  AttributeSpec spec;
  std::size_t line = 0;
};

RawAttribute parse_attribute(std::string_view text, std::size_t line) {
  std::size_t pos = 0;
  read_token(text, pos, "", line);  // the @attribute keyword
  RawAttribute raw;
  raw.line = line;
  raw.spec.name = read_token(text, pos, "{", line);
  if (raw.spec.name.empty()) throw ParseError(line, "malformed @attribute: missing name");
  const auto type = trim(text.substr(pos));
  if (type.empty()) throw ParseError(line, "malformed @attribute: missing type for '" + raw.spec.name + "'");
  if (type.front() == '{') {
    const auto close = type.rfind('}');
    if (close == std::string_view::npos) throw ParseError(line, "malformed @attribute: unterminated value list");
    raw.spec.kind = AttributeKind::nominal;
    const auto inner = trim(type.substr(1, close - 1));
    if (inner.empty()) throw ParseError(line, "nominal attribute '" + raw.spec.name + "' has no values");
    raw.spec.values = split_values(inner, line);
    std::unordered_set<std::string> seen;
    for (const auto& v : raw.spec.values) {
      if (!seen.insert(v).second) {
        throw ParseError(line, "duplicate value '" + v + "' in nominal attribute '" + raw.spec.name + "'");
      }
    }
    return raw;
  }
  const auto kind = lower(type);
  if (kind == "numeric" || kind == "real" || kind == "integer") {
    raw.spec.kind = AttributeKind::numeric;
    return raw;
  }
  throw ParseError(line, "unsupported attribute type '" + std::string(type) + "' for '" + raw.spec.name + "'");
}

bool parse_number(std::string_view token, double& out) {
  const std::string buf(token);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && !buf.empty();
}

/// Maps an ARFF attribute column to either a feature slot or a label slot.
struct ColumnTarget {
  bool is_label = false;
  std::size_t index = 0;
};

class RowBuilder {
 public:
  RowBuilder(const std::vector<RawAttribute>& attrs, const std::vector<ColumnTarget>& targets,
             std::size_t feature_count, std::size_t label_count)
      : attrs_(attrs), targets_(targets), feature_count_(feature_count), label_count_(label_count) {}

  void reset_sparse() {
    values_.assign(feature_count_, 0.0);
    labels_.assign(label_count_, 0);
    for (std::size_t c = 0; c < attrs_.size(); ++c) {
      // unlisted sparse entries take internal value 0, i.e. the first declared nominal value
      if (targets_[c].is_label) labels_[targets_[c].index] = attrs_[c].spec.values[0] == "1" ? 1 : 0;
    }
  }
  void reset_dense() {
    values_.assign(feature_count_, 0.0);
    labels_.assign(label_count_, 0);
  }

  void assign(std::size_t column, std::string_view token, bool quoted, std::size_t line) {
    const auto& spec = attrs_[column].spec;
    const auto& target = targets_[column];
    if (!quoted && token == "?") {
      if (target.is_label) throw ParseError(line, "missing value for label '" + spec.name + "'");
      values_[target.index] = kMissing;
      return;
    }
    if (target.is_label) {
      if (token != "0" && token != "1") {
        throw ParseError(line, "label '" + spec.name + "' has non-binary value '" + std::string(token) + "'");
      }
      labels_[target.index] = token == "1" ? 1 : 0;
      return;
    }
    if (spec.is_nominal()) {
      const auto idx = spec.value_index(token);
      if (!idx) {
        throw ParseError(line, "unknown value '" + std::string(token) + "' for nominal attribute '" + spec.name + "'");
      }
      values_[target.index] = static_cast<double>(*idx);
      return;
    }
    double v = 0.0;
    if (!parse_number(token, v)) {
      throw ParseError(line, "invalid numeric value '" + std::string(token) + "' for '" + spec.name + "'");
    }
    values_[target.index] = v;
  }

  std::vector<double> take_values() { return std::move(values_); }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

 private:
  const std::vector<RawAttribute>& attrs_;
  const std::vector<ColumnTarget>& targets_;
  std::size_t feature_count_;
  std::size_t label_count_;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
};

/// Next value token of a data row: returns (token, quoted) and advances past the separator.
std::pair<std::string, bool> next_cell(std::string_view s, std::size_t& pos, std::string_view stops,
                                       std::size_t line) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos >= s.size()) throw ParseError(line, "too few values in data row");
  const bool quoted = s[pos] == '\'' || s[pos] == '"';
  if (quoted) return {read_token(s, pos, stops, line), true};
  const std::size_t start = pos;
  while (pos < s.size() && stops.find(s[pos]) == std::string_view::npos) ++pos;
  return {std::string(trim(s.substr(start, pos - start))), false};
}

}  // namespace

MultiLabelDataset parse_arff(std::istream& in, std::span<const std::string> label_names) {
  MultiLabelDataset ds;
  std::vector<RawAttribute> attrs;
  std::string raw_line;
  std::size_t line_no = 0;
  bool in_data = false;
  std::vector<ColumnTarget> targets;
  std::unique_ptr<RowBuilder> builder;

  auto finish_header = [&](std::size_t line) {
    std::unordered_map<std::string, std::size_t> by_name;
    for (std::size_t c = 0; c < attrs.size(); ++c) {
      if (!by_name.emplace(attrs[c].spec.name, c).second) {
        throw ParseError(attrs[c].line, "duplicate attribute name '" + attrs[c].spec.name + "'");
      }
    }
    std::unordered_map<std::string, std::size_t> label_slot;
    for (std::size_t i = 0; i < label_names.size(); ++i) {
      const auto it = by_name.find(label_names[i]);
      if (it == by_name.end()) throw ParseError(line, "unknown label '" + label_names[i] + "': no such attribute");
      const auto& spec = attrs[it->second].spec;
      const bool binary = spec.is_nominal() && spec.values.size() == 2 &&
                          ((spec.values[0] == "0" && spec.values[1] == "1") ||
                           (spec.values[0] == "1" && spec.values[1] == "0"));
      if (!binary) {
        throw ParseError(attrs[it->second].line, "label attribute '" + spec.name + "' is not nominal {0,1}");
      }
      if (!label_slot.emplace(label_names[i], i).second) {
        throw ParseError(line, "label '" + label_names[i] + "' listed twice");
      }
    }
    targets.resize(attrs.size());
    for (std::size_t c = 0; c < attrs.size(); ++c) {
      const auto it = label_slot.find(attrs[c].spec.name);
      if (it != label_slot.end()) {
        targets[c] = {true, it->second};
      } else {
        targets[c] = {false, ds.attributes.size()};
        ds.attributes.push_back(attrs[c].spec);
      }
    }
    ds.label_names.assign(label_names.begin(), label_names.end());
    ds.labels = LabelMatrix(0, label_names.size());
    builder = std::make_unique<RowBuilder>(attrs, targets, ds.attributes.size(), label_names.size());
  };

  while (std::getline(in, raw_line)) {
    ++line_no;
    if (!raw_line.empty() && raw_line.back() == '\r') raw_line.pop_back();
    const auto line = trim(raw_line);
    if (line.empty() || line.front() == '%') continue;

    if (!in_data) {
      if (line.front() != '@') throw ParseError(line_no, "expected a header declaration");
      if (starts_with_keyword(line, "@relation")) {
        std::size_t pos = 9;
        ds.relation = read_token(line, pos, "", line_no);
      } else if (starts_with_keyword(line, "@attribute")) {
        attrs.push_back(parse_attribute(line, line_no));
      } else if (starts_with_keyword(line, "@data")) {
        finish_header(line_no);
        in_data = true;
      } else {
        throw ParseError(line_no, "unknown header declaration '" + std::string(line.substr(0, line.find(' '))) + "'");
      }
      continue;
    }

    if (line.front() == '{') {
      builder->reset_sparse();
      const auto close = line.find('}');
      if (close == std::string_view::npos) throw ParseError(line_no, "unterminated sparse row");
      const auto body = trim(line.substr(1, close - 1));
      std::size_t pos = 0;
      std::size_t previous = 0;
      bool first = true;
      while (pos < body.size()) {
        while (pos < body.size() && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
        std::size_t idx_end = pos;
        while (idx_end < body.size() && std::isdigit(static_cast<unsigned char>(body[idx_end]))) ++idx_end;
        std::size_t column = 0;
        if (idx_end == pos ||
            std::from_chars(body.data() + pos, body.data() + idx_end, column).ec != std::errc{}) {
          throw ParseError(line_no, "malformed sparse entry: expected attribute index");
        }
        if (column >= attrs.size()) throw ParseError(line_no, "sparse index " + std::to_string(column) + " out of range");
        if (!first && column <= previous) throw ParseError(line_no, "sparse indices must be increasing");
        first = false;
        previous = column;
        pos = idx_end;
        auto [token, quoted] = next_cell(body, pos, ",", line_no);
        if (token.empty()) throw ParseError(line_no, "malformed sparse entry: missing value");
        builder->assign(column, token, quoted, line_no);
        while (pos < body.size() && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
        if (pos < body.size()) {
          if (body[pos] != ',') throw ParseError(line_no, "malformed sparse entry: expected ','");
          ++pos;
        }
      }
    } else {
      builder->reset_dense();
      std::size_t pos = 0;
      for (std::size_t c = 0; c < attrs.size(); ++c) {
        auto [token, quoted] = next_cell(line, pos, ",", line_no);
        if (token.empty() && !quoted) throw ParseError(line_no, "empty value in data row");
        builder->assign(c, token, quoted, line_no);
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        if (c + 1 < attrs.size()) {
          if (pos >= line.size() || line[pos] != ',') throw ParseError(line_no, "too few values in data row");
          ++pos;
        }
      }
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      // an optional trailing instance weight "{w}" is tolerated and ignored
      if (pos < line.size()) {
        const auto rest = trim(line.substr(pos));
        if (!(rest.size() > 2 && rest[0] == ',' && trim(rest.substr(1)).front() == '{')) {
          throw ParseError(line_no, "too many values in data row");
        }
      }
    }
    ds.instances.push_back(Instance{builder->take_values()});
    ds.labels.append_row(builder->labels());
  }

  if (!in_data) {
    throw ParseError(line_no, "missing @data section");
  }
  ds.minority = compute_minority_classes(ds.labels);
  return ds;
}

MultiLabelDataset parse_arff(std::string_view text, std::span<const std::string> label_names) {
  std::istringstream in{std::string(text)};
  return parse_arff(in, label_names);
}

}  // namespace mlrules

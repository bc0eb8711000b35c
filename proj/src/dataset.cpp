#include "mlrules/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "mlrules/error.hpp"
#include "mlrules/hash.hpp"

namespace mlrules {

std::optional<std::size_t> AttributeSpec::value_index(std::string_view value) const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == value) return i;
  }
  return std::nullopt;
}

AttributeSpec AttributeSpec::numeric(std::string name) {
  return AttributeSpec{std::move(name), AttributeKind::numeric, {}};
}

AttributeSpec AttributeSpec::nominal(std::string name, std::vector<std::string> values) {
  return AttributeSpec{std::move(name), AttributeKind::nominal, std::move(values)};
}

std::size_t LabelMatrix::count_ones(std::size_t col) const noexcept {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows_; ++r) n += bits_[r * cols_ + col];
  return n;
}

void LabelMatrix::flip_column(std::size_t col) noexcept {
  for (std::size_t r = 0; r < rows_; ++r) bits_[r * cols_ + col] ^= 1;
}

void LabelMatrix::append_row(std::span<const std::uint8_t> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  bits_.insert(bits_.end(), values.begin(), values.end());
  ++rows_;
}

MultiLabelDataset MultiLabelDataset::subset(std::span<const std::size_t> rows) const {
  MultiLabelDataset out;
  out.relation = relation;
  out.attributes = attributes;
  out.label_names = label_names;
  out.inverted = inverted;
  out.instances.reserve(rows.size());
  out.labels = LabelMatrix(rows.size(), num_labels());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.instances.push_back(instances.at(rows[r]));
    for (std::size_t c = 0; c < num_labels(); ++c) out.labels.set(r, c, labels.at(rows[r], c));
  }
  out.minority = rows.empty() ? minority : compute_minority_classes(out.labels);
  return out;
}

bool MultiLabelDataset::operator==(const MultiLabelDataset& other) const {
  if (relation != other.relation || attributes != other.attributes || labels != other.labels ||
      label_names != other.label_names || minority != other.minority || inverted != other.inverted ||
      instances.size() != other.instances.size()) {
    return false;
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& a = instances[i].values;
    const auto& b = other.instances[i].values;
    if (a.size() != b.size()) return false;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (is_missing(a[j]) != is_missing(b[j])) return false;
      if (!is_missing(a[j]) && a[j] != b[j]) return false;
    }
  }
  return true;
}

std::vector<std::uint8_t> compute_minority_classes(const LabelMatrix& labels) {
  std::vector<std::uint8_t> t(labels.cols(), 0);
  for (std::size_t c = 0; c < labels.cols(); ++c) {
    // count < m/2, kept in integers
    t[c] = 2 * labels.count_ones(c) < labels.rows() ? 1 : 0;
  }
  return t;
}

MultiLabelDataset invert_frequent_labels(MultiLabelDataset dataset) {
  dataset.minority = compute_minority_classes(dataset.labels);
  const std::size_t m = dataset.labels.rows();
  for (std::size_t c = 0; c < dataset.num_labels(); ++c) {
    if (dataset.minority[c] != 0) continue;
    if (2 * dataset.labels.count_ones(c) == m) continue;  // balanced: no-op
    dataset.labels.flip_column(c);
    dataset.inverted.push_back(c);
  }
  std::sort(dataset.inverted.begin(), dataset.inverted.end());
  dataset.inverted.erase(std::unique(dataset.inverted.begin(), dataset.inverted.end()),
                         dataset.inverted.end());
  dataset.minority = compute_minority_classes(dataset.labels);
  return dataset;
}

MultiLabelDataset impute_missing(MultiLabelDataset dataset) {
  for (std::size_t a = 0; a < dataset.num_attributes(); ++a) {
    const auto& spec = dataset.attributes[a];
    bool any_missing = false;
    std::size_t present = 0;
    double sum = 0.0;
    std::vector<std::size_t> counts(spec.values.size(), 0);
    for (const auto& inst : dataset.instances) {
      const double v = inst.values[a];
      if (is_missing(v)) {
        any_missing = true;
        continue;
      }
      ++present;
      if (spec.is_nominal()) {
        ++counts[static_cast<std::size_t>(v)];
      } else {
        sum += v;
      }
    }
    if (!any_missing) continue;
    if (present == 0) {
      throw DataError("attribute '" + spec.name + "' has no observed values; cannot impute");
    }
    double fill = 0.0;
    if (spec.is_nominal()) {
      fill = static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    } else {
      fill = sum / static_cast<double>(present);
    }
    for (auto& inst : dataset.instances) {
      if (is_missing(inst.values[a])) inst.values[a] = fill;
    }
  }
  return dataset;
}

MultiLabelDataset preprocess(MultiLabelDataset dataset) {
  return invert_frequent_labels(impute_missing(std::move(dataset)));
}

namespace {

bool needs_quotes(std::string_view s) {
  if (s.empty()) return true;
  return s.find_first_of(" \t,{}'\"%") != std::string_view::npos;
}

std::string quote(std::string_view s) {
  if (!needs_quotes(s)) return std::string(s);
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string write_arff(const MultiLabelDataset& dataset) {
  std::ostringstream os;
  os << "@relation " << quote(dataset.relation.empty() ? "dataset" : dataset.relation) << "\n\n";
  for (const auto& a : dataset.attributes) {
    os << "@attribute " << quote(a.name) << ' ';
    if (a.is_nominal()) {
      os << '{';
      for (std::size_t i = 0; i < a.values.size(); ++i) os << (i ? "," : "") << quote(a.values[i]);
      os << '}';
    } else {
      os << "numeric";
    }
    os << '\n';
  }
  for (const auto& name : dataset.label_names) os << "@attribute " << quote(name) << " {0,1}\n";
  os << "\n@data\n";
  for (std::size_t r = 0; r < dataset.num_instances(); ++r) {
    const auto& values = dataset.instances[r].values;
    for (std::size_t a = 0; a < values.size(); ++a) {
      if (a) os << ',';
      const double v = values[a];
      if (is_missing(v)) {
        os << '?';
      } else if (dataset.attributes[a].is_nominal()) {
        os << quote(dataset.attributes[a].values[static_cast<std::size_t>(v)]);
      } else {
        os << format_double(v);
      }
    }
    for (std::size_t c = 0; c < dataset.num_labels(); ++c) {
      if (!values.empty() || c) os << ',';
      os << static_cast<int>(dataset.labels.at(r, c));
    }
    os << '\n';
  }
  return os.str();
}

std::string dataset_to_json(const MultiLabelDataset& dataset) {
  using nlohmann::json;
  json doc;
  doc["format_version"] = 1;
  doc["kind"] = "mlrules.dataset";
  doc["relation"] = dataset.relation;
  json attrs = json::array();
  for (const auto& a : dataset.attributes) {
    json j{{"name", a.name}, {"kind", a.is_nominal() ? "nominal" : "numeric"}};
    if (a.is_nominal()) j["values"] = a.values;
    attrs.push_back(std::move(j));
  }
  doc["attributes"] = std::move(attrs);
  doc["label_names"] = dataset.label_names;
  doc["minority"] = dataset.minority;
  doc["inverted"] = dataset.inverted;
  json rows = json::array();
  for (std::size_t r = 0; r < dataset.num_instances(); ++r) {
    json values = json::array();
    for (double v : dataset.instances[r].values) {
      if (is_missing(v)) {
        values.push_back(nullptr);
      } else {
        values.push_back(v);
      }
    }
    json labels = json::array();
    for (auto b : dataset.labels.row(r)) labels.push_back(b);
    rows.push_back(json{{"x", std::move(values)}, {"y", std::move(labels)}});
  }
  doc["instances"] = std::move(rows);
  return doc.dump(1);
}

std::string dataset_hash(const MultiLabelDataset& dataset) {
  Fnv1a h;
  for (const auto& a : dataset.attributes) {
    h.update(a.name);
    h.update(static_cast<std::uint64_t>(a.kind));
    for (const auto& v : a.values) h.update(v);
  }
  for (const auto& n : dataset.label_names) h.update(n);
  h.update(static_cast<std::uint64_t>(dataset.num_instances()));
  for (std::size_t r = 0; r < dataset.num_instances(); ++r) {
    for (double v : dataset.instances[r].values) {
      h.update(is_missing(v) ? std::uint64_t{0x7ff8dead} : std::uint64_t{0});
      if (!is_missing(v)) h.update(v);
    }
    for (auto b : dataset.labels.row(r)) h.update(static_cast<std::uint64_t>(b));
  }
  for (auto i : dataset.inverted) h.update(static_cast<std::uint64_t>(i));
  return h.hex();
}

MultiLabelDataset load_dataset(const std::string& arff_path, const std::string& labels_xml_path) {
  std::ifstream xml(labels_xml_path);
  if (!xml) throw ParseError("cannot open label header '" + labels_xml_path + "'");
  const auto names = parse_label_header(xml);
  std::ifstream arff(arff_path);
  if (!arff) throw ParseError("cannot open ARFF file '" + arff_path + "'");
  return parse_arff(arff, names);
}

}  // namespace mlrules

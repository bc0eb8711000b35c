#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlrules {

enum class AttributeKind : std::uint8_t { numeric, nominal };

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  std::vector<std::string> values;  // nominal value list, declaration order

  bool is_nominal() const noexcept { return kind == AttributeKind::nominal; }
  std::optional<std::size_t> value_index(std::string_view value) const;

  static AttributeSpec numeric(std::string name);
  static AttributeSpec nominal(std::string name, std::vector<std::string> values);

  bool operator==(const AttributeSpec&) const = default;
};

/// Missing feature values are stored as quiet NaN; nominal values as their
/// interned index.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

struct Instance {
  std::vector<double> values;
};

/// Dense row-major binary matrix (instances x labels).
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::uint8_t at(std::size_t row, std::size_t col) const noexcept { return bits_[row * cols_ + col]; }
  void set(std::size_t row, std::size_t col, bool value) noexcept {
    bits_[row * cols_ + col] = value ? 1 : 0;
  }
  std::span<const std::uint8_t> row(std::size_t r) const noexcept {
    return {bits_.data() + r * cols_, cols_};
  }

  std::size_t count_ones(std::size_t col) const noexcept;
  void flip_column(std::size_t col) noexcept;
  void append_row(std::span<const std::uint8_t> values);

  bool operator==(const LabelMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct MultiLabelDataset {
  std::string relation;
  std::vector<AttributeSpec> attributes;
  std::vector<Instance> instances;
  LabelMatrix labels;
  std::vector<std::string> label_names;
  std::vector<std::uint8_t> minority;
  std::vector<std::size_t> inverted;  // label indices flipped at ingestion, ascending

  std::size_t num_instances() const noexcept { return instances.size(); }
  std::size_t num_attributes() const noexcept { return attributes.size(); }
  std::size_t num_labels() const noexcept { return label_names.size(); }

  /// Rows selected by index, in the given order. Minority classes are
  /// recomputed on the subset; attribute specs and inversion record carry over.
  MultiLabelDataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const MultiLabelDataset& other) const;
};

/// Parses an ARFF document. Attributes named in `label_names` become label
/// columns (nominal {0,1} required); the rest become features in declaration order.
MultiLabelDataset parse_arff(std::istream& in, std::span<const std::string> label_names);
MultiLabelDataset parse_arff(std::string_view text, std::span<const std::string> label_names);

/// Label names from a Mulan XML label header, in document order.
std::vector<std::string> parse_label_header(std::istream& in);
std::vector<std::string> parse_label_header(std::string_view text);

/// t_i = 1 iff label i is present in fewer than half of the rows.
std::vector<std::uint8_t> compute_minority_classes(const LabelMatrix& labels);

/// Flips every label column whose minority class is 0, except exactly balanced ones.
MultiLabelDataset invert_frequent_labels(MultiLabelDataset dataset);

/// Numeric missing -> column mean, nominal missing -> column mode (lowest index on ties).
MultiLabelDataset impute_missing(MultiLabelDataset dataset);

/// impute_missing followed by invert_frequent_labels.
MultiLabelDataset preprocess(MultiLabelDataset dataset);

/// Dense ARFF rendering (features first, then labels as {0,1}).
std::string write_arff(const MultiLabelDataset& dataset);

/// Versioned canonical JSON dump.
std::string dataset_to_json(const MultiLabelDataset& dataset);

/// 16 hex digit content fingerprint over attributes, values and labels.
std::string dataset_hash(const MultiLabelDataset& dataset);

/// Loads an ARFF file plus its XML label header.
MultiLabelDataset load_dataset(const std::string& arff_path, const std::string& labels_xml_path);

}  // namespace mlrules

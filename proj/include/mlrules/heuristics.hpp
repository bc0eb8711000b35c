#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "mlrules/dataset.hpp"
#include "mlrules/rule.hpp"

namespace mlrules {

/// Counts are doubles so aggregates over many folds stay exact up to 2^53.
/// "Positive" always means "equals the label's minority class".
struct ConfusionMatrix {
  double tp = 0;
  double fp = 0;
  double fn = 0;
  double tn = 0;

  double p() const noexcept { return tp + fn; }
  double n() const noexcept { return fp + tn; }
  double total() const noexcept { return tp + fp + fn + tn; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend ConfusionMatrix operator+(ConfusionMatrix a, const ConfusionMatrix& b) noexcept { return a += b; }

  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix atomic_confusion(std::uint8_t truth, std::uint8_t predicted, std::uint8_t minority) noexcept;

/// Covered rows predict the minority class, uncovered rows the majority class.
ConfusionMatrix confusion_for_rule(const Rule& rule, const MultiLabelDataset& dataset, std::size_t label);

enum class HeuristicKind : std::uint8_t { precision, recall, f_measure, m_estimate, wra };

/// Grammar: `precision` | `recall` | `wra` | `f:<beta>` | `m:<m>`, where the
/// parameter is a non-negative decimal or `inf`. Whitespace is not allowed.
struct HeuristicSpec {
  HeuristicKind kind = HeuristicKind::precision;
  double parameter = 0.0;  // beta or m; unused otherwise

  static HeuristicSpec precision() { return {HeuristicKind::precision, 0.0}; }
  static HeuristicSpec recall() { return {HeuristicKind::recall, 0.0}; }
  static HeuristicSpec f_measure(double beta);
  static HeuristicSpec m_estimate(double m);
  static HeuristicSpec wra() { return {HeuristicKind::wra, 0.0}; }

  /// Throws ConfigError carrying the grammar on malformed input.
  static HeuristicSpec parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const HeuristicSpec&) const = default;
};

inline constexpr std::string_view kHeuristicGrammar = "precision | recall | wra | f:<beta> | m:<m>";

/// Value in [0, 1]; every 0/0 form evaluates to 0. WRA is rescaled as raw * 2 + 0.5.
double evaluate(const HeuristicSpec& spec, const ConfusionMatrix& c) noexcept;

double precision(const ConfusionMatrix& c) noexcept;
double recall(const ConfusionMatrix& c) noexcept;
double f_measure(const ConfusionMatrix& c, double beta) noexcept;
double m_estimate(const ConfusionMatrix& c, double m) noexcept;
/// Unscaled WRA in [-0.25, 0.25].
double wra_raw(const ConfusionMatrix& c) noexcept;

}  // namespace mlrules

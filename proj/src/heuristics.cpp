#include "mlrules/heuristics.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "mlrules/error.hpp"

namespace mlrules {

ConfusionMatrix atomic_confusion(std::uint8_t truth, std::uint8_t predicted, std::uint8_t minority) noexcept {
  ConfusionMatrix c;
  const bool pos = truth == minority;
  const bool hit = predicted == minority;
  if (pos && hit) c.tp = 1;
  else if (!pos && hit) c.fp = 1;
  else if (pos) c.fn = 1;
  else c.tn = 1;
  return c;
}

ConfusionMatrix confusion_for_rule(const Rule& rule, const MultiLabelDataset& dataset, std::size_t label) {
  const std::uint8_t t = dataset.minority.at(label);
  std::size_t counts[2][2] = {{0, 0}, {0, 0}};  // [positive][covered]
  for (std::size_t j = 0; j < dataset.num_instances(); ++j) {
    const bool pos = dataset.labels.at(j, label) == t;
    const bool cov = covers(rule, dataset.instances[j]);
    ++counts[pos][cov];
  }
  return {static_cast<double>(counts[1][1]), static_cast<double>(counts[0][1]), static_cast<double>(counts[1][0]),
          static_cast<double>(counts[0][0])};
}

HeuristicSpec HeuristicSpec::f_measure(double beta) {
  if (!(beta >= 0)) throw ConfigError("F-measure beta must be >= 0");
  return {HeuristicKind::f_measure, beta};
}

HeuristicSpec HeuristicSpec::m_estimate(double m) {
  if (!(m >= 0)) throw ConfigError("m-estimate m must be >= 0");
  return {HeuristicKind::m_estimate, m};
}

HeuristicSpec HeuristicSpec::parse(std::string_view text) {
  const auto fail = [&](const std::string& why) -> ConfigError {
    return ConfigError("invalid heuristic '" + std::string(text) + "': " + why + " (expected " +
                       std::string(kHeuristicGrammar) + ")");
  };
  if (text == "precision") return precision();
  if (text == "recall") return recall();
  if (text == "wra") return wra();
  if (text.size() < 3 || text[1] != ':' || (text[0] != 'f' && text[0] != 'm')) throw fail("unknown form");
  const auto arg = text.substr(2);
  double value = 0;
  if (arg == "inf") {
    value = std::numeric_limits<double>::infinity();
  } else {
    const auto [end, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
    if (ec != std::errc{} || end != arg.data() + arg.size()) throw fail("parameter is not a number");
    if (!std::isfinite(value)) throw fail("parameter is not finite");
  }
  if (value < 0) throw fail("parameter must be >= 0");
  return text[0] == 'f' ? f_measure(value) : m_estimate(value);
}

std::string HeuristicSpec::to_string() const {
  const auto param = [this] {
    if (std::isinf(parameter)) return std::string("inf");
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, parameter);
    return std::string(buf, ec == std::errc{} ? end : buf);
  };
  switch (kind) {
    case HeuristicKind::precision: return "precision";
    case HeuristicKind::recall: return "recall";
    case HeuristicKind::wra: return "wra";
    case HeuristicKind::f_measure: return "f:" + param();
    case HeuristicKind::m_estimate: return "m:" + param();
  }
  return "?";
}

double precision(const ConfusionMatrix& c) noexcept {
  const double covered = c.tp + c.fp;
  return covered > 0 ? c.tp / covered : 0.0;
}

double recall(const ConfusionMatrix& c) noexcept {
  const double p = c.p();
  return p > 0 ? c.tp / p : 0.0;
}

double f_measure(const ConfusionMatrix& c, double beta) noexcept {
  const double prec = precision(c);
  const double rec = recall(c);
  if (std::isinf(beta)) return rec;
  const double b2 = beta * beta;
  const double denom = b2 * prec + rec;
  return denom > 0 ? (1 + b2) * prec * rec / denom : 0.0;
}

double m_estimate(const ConfusionMatrix& c, double m) noexcept {
  const double covered = c.tp + c.fp;
  if (m == 0) return precision(c);
  const double total = c.total();
  const double prior = total > 0 ? c.p() / total : 0.0;
  if (std::isinf(m)) return prior;
  const double denom = covered + m;
  return denom > 0 ? (c.tp + m * prior) / denom : 0.0;
}

double wra_raw(const ConfusionMatrix& c) noexcept {
  const double total = c.total();
  const double covered = c.tp + c.fp;
  if (total <= 0 || covered <= 0) return 0.0;
  return covered / total * (c.tp / covered - c.p() / total);
}

double evaluate(const HeuristicSpec& spec, const ConfusionMatrix& c) noexcept {
  switch (spec.kind) {
    case HeuristicKind::precision: return precision(c);
    case HeuristicKind::recall: return recall(c);
    case HeuristicKind::f_measure: return f_measure(c, spec.parameter);
    case HeuristicKind::m_estimate: return m_estimate(c, spec.parameter);
    case HeuristicKind::wra: return wra_raw(c) * 2 + 0.5;
  }
  return 0.0;
}

}  // namespace mlrules

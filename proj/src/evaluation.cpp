#include "mlrules/evaluation.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "mlrules/error.hpp"

namespace mlrules {

ConfusionMatrix global_confusion(const LabelMatrix& truth, const LabelMatrix& predicted,
                                 std::span<const std::uint8_t> minority) {
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols()) {
    throw DataError("label matrices differ in shape");
  }
  if (minority.size() != truth.cols()) throw DataError("minority vector length differs from label count");
  std::size_t counts[2][2] = {{0, 0}, {0, 0}};  // [positive][predicted positive]
  for (std::size_t j = 0; j < truth.rows(); ++j) {
    const auto y = truth.row(j);
    const auto yhat = predicted.row(j);
    for (std::size_t i = 0; i < truth.cols(); ++i) ++counts[y[i] == minority[i]][yhat[i] == minority[i]];
  }
  return {static_cast<double>(counts[1][1]), static_cast<double>(counts[0][1]), static_cast<double>(counts[1][0]),
          static_cast<double>(counts[0][0])};
}

MicroMeasures micro_measures(const ConfusionMatrix& c) noexcept {
  // count form of F1; avoids the rounding of 2PR/(P+R)
  const double denom = 2 * c.tp + c.fp + c.fn;
  return {precision(c), recall(c), denom > 0 ? 2 * c.tp / denom : 0.0};
}

double hamming_accuracy(const ConfusionMatrix& c) noexcept {
  const double total = c.total();
  return total > 0 ? (c.tp + c.tn) / total : 0.0;
}

double subset_accuracy(const LabelMatrix& truth, const LabelMatrix& predicted) {
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols()) {
    throw DataError("label matrices differ in shape");
  }
  if (truth.rows() == 0) return 0.0;
  std::size_t exact = 0;
  for (std::size_t j = 0; j < truth.rows(); ++j) {
    const auto a = truth.row(j);
    const auto b = predicted.row(j);
    exact += std::equal(a.begin(), a.end(), b.begin()) ? 1 : 0;
  }
  return static_cast<double>(exact) / static_cast<double>(truth.rows());
}

TargetMeasure parse_target(std::string_view text) {
  if (text == "f1") return TargetMeasure::f1;
  if (text == "hamming") return TargetMeasure::hamming;
  if (text == "subset") return TargetMeasure::subset;
  throw ConfigError("unknown target measure '" + std::string(text) + "' (expected f1 | hamming | subset)");
}

const char* target_name(TargetMeasure target) noexcept {
  switch (target) {
    case TargetMeasure::f1: return "f1";
    case TargetMeasure::hamming: return "hamming";
    case TargetMeasure::subset: return "subset";
  }
  return "?";
}

double measure_value(const Metrics& m, TargetMeasure target) noexcept {
  switch (target) {
    case TargetMeasure::f1: return m.f1;
    case TargetMeasure::hamming: return m.hamming;
    case TargetMeasure::subset: return m.subset;
  }
  return 0.0;
}

Metrics compute_metrics(const LabelMatrix& truth, const LabelMatrix& predicted,
                        std::span<const std::uint8_t> minority) {
  const auto c = global_confusion(truth, predicted, minority);
  const auto micro = micro_measures(c);
  Metrics m;
  m.precision = micro.precision;
  m.recall = micro.recall;
  m.f1 = micro.f1;
  m.hamming = hamming_accuracy(c);
  m.subset = subset_accuracy(truth, predicted);
  return m;
}

Metrics mean_metrics(std::span<const Metrics> folds) {
  Metrics out;
  if (folds.empty()) return out;
  for (const auto& f : folds) {
    out.precision += f.precision;
    out.recall += f.recall;
    out.f1 += f.f1;
    out.hamming += f.hamming;
    out.subset += f.subset;
    out.rules += f.rules;
    out.avg_conditions += f.avg_conditions;
  }
  const double n = static_cast<double>(folds.size());
  out.precision /= n;
  out.recall /= n;
  out.f1 /= n;
  out.hamming /= n;
  out.subset /= n;
  out.rules /= n;
  out.avg_conditions /= n;
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

std::string metrics_to_csv(std::span<const MetricsRow> rows) {
  std::ostringstream os;
  os << "# mlrules metrics format_version=1\n" << kMetricsHeader << '\n';
  char buf[256];
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f\n", m.precision, m.recall, m.f1, m.hamming,
                  m.subset, m.rules, m.avg_conditions);
    os << r.dataset << ',' << (r.fold < 0 ? std::string("mean") : std::to_string(r.fold)) << ','
       << format_number(r.m) << ',' << format_number(r.retention) << buf;
  }
  return os.str();
}

std::vector<MetricsRow> metrics_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("format_version=");
      if (pos != std::string::npos && std::atoi(line.c_str() + pos + 15) != 1) {
        throw ParseError(line_no, "unsupported metrics format_version");
      }
      continue;
    }
    if (!header) {
      if (line != kMetricsHeader) throw ParseError(line_no, "unexpected metrics CSV header");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 11) throw ParseError(line_no, "expected 11 columns, found " + std::to_string(cells.size()));
    const auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) throw ParseError(line_no, "invalid number '" + s + "'");
      return v;
    };
    MetricsRow r;
    r.dataset = cells[0];
    r.fold = cells[1] == "mean" ? -1 : static_cast<int>(num(cells[1]));
    r.m = num(cells[2]);
    r.retention = num(cells[3]);
    r.metrics = {num(cells[4]), num(cells[5]), num(cells[6]), num(cells[7]), num(cells[8]), num(cells[9]),
                 num(cells[10])};
    rows.push_back(std::move(r));
  }
  if (!header) throw ParseError("metrics CSV has no header");
  return rows;
}

}  // namespace mlrules

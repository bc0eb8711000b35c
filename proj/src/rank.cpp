#include "mlrules/rank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "mlrules/error.hpp"

namespace mlrules {

std::vector<DatasetTable> tables_from_rows(std::span<const MetricsRow> rows) {
  std::vector<DatasetTable> tables;
  std::map<std::string, std::size_t> index;
  std::vector<std::map<std::pair<double, double>, Metrics>> cells;
  for (const auto& r : rows) {
    if (r.fold >= 0) continue;
    auto [it, fresh] = index.emplace(r.dataset, tables.size());
    if (fresh) {
      tables.push_back({r.dataset, {}, {}, {}});
      cells.emplace_back();
    }
    auto& t = tables[it->second];
    if (std::find(t.m_values.begin(), t.m_values.end(), r.m) == t.m_values.end()) t.m_values.push_back(r.m);
    if (std::find(t.retentions.begin(), t.retentions.end(), r.retention) == t.retentions.end()) {
      t.retentions.push_back(r.retention);
    }
    if (!cells[it->second].emplace(std::pair{r.m, r.retention}, r.metrics).second) {
      throw ParseError("duplicate mean row for dataset '" + r.dataset + "'");
    }
  }
  for (std::size_t d = 0; d < tables.size(); ++d) {
    auto& t = tables[d];
    for (const double m : t.m_values) {
      for (const double r : t.retentions) {
        const auto it = cells[d].find({m, r});
        if (it == cells[d].end()) throw ParseError("dataset '" + t.dataset + "' has an incomplete grid");
        t.cells.push_back(it->second);
      }
    }
  }
  return tables;
}

double metric_by_name(const Metrics& m, std::string_view measure) {
  if (measure == "precision") return m.precision;
  if (measure == "recall") return m.recall;
  if (measure == "f1") return m.f1;
  if (measure == "hamming") return m.hamming;
  if (measure == "subset") return m.subset;
  if (measure == "rules") return m.rules;
  if (measure == "avg_conditions") return m.avg_conditions;
  throw ConfigError("unknown measure '" + std::string(measure) + "'");
}

bool higher_is_better(std::string_view measure) {
  if (measure == "rules" || measure == "avg_conditions") return false;
  metric_by_name(Metrics{}, measure);  // rejects unknown names
  return true;
}

std::vector<double> fractional_ranks(std::span<const double> values, bool higher_better) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return higher_better ? values[a] > values[b] : values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t p = i; p <= j; ++p) ranks[order[p]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::vector<RankMatrix> rank_matrices(std::span<const DatasetTable> tables, std::span<const std::string> measures) {
  if (tables.empty()) throw ConfigError("rank matrices need at least one dataset");
  const auto& first = tables.front();
  for (const auto& t : tables) {
    if (t.m_values != first.m_values || t.retentions != first.retentions ||
        t.cells.size() != first.m_values.size() * first.retentions.size()) {
      throw ConfigError("dataset '" + t.dataset + "' uses a different grid than '" + first.dataset + "'");
    }
  }
  const std::size_t cells = first.cells.size();
  const double d = static_cast<double>(tables.size());
  std::vector<RankMatrix> out;
  for (const auto& measure : measures) {
    const bool higher = higher_is_better(measure);
    RankMatrix rm;
    rm.measure = measure;
    rm.m_values = first.m_values;
    rm.retentions = first.retentions;
    rm.datasets = tables.size();
    rm.mean_rank.assign(cells, 0.0);
    rm.std_dev.assign(cells, 0.0);
    rm.best.assign(cells, {});
    std::vector<std::vector<double>> ranks;
    for (const auto& t : tables) {
      std::vector<double> values(cells);
      for (std::size_t c = 0; c < cells; ++c) values[c] = metric_by_name(t.cells[c], measure);
      ranks.push_back(fractional_ranks(values, higher));
      const double best = higher ? *std::max_element(values.begin(), values.end())
                                 : *std::min_element(values.begin(), values.end());
      for (std::size_t c = 0; c < cells; ++c) {
        if (values[c] == best) rm.best[c].push_back(t.dataset);
      }
    }
    for (std::size_t c = 0; c < cells; ++c) {
      double sum = 0;
      for (const auto& r : ranks) sum += r[c];
      const double mean = sum / d;
      double sq = 0;
      for (const auto& r : ranks) sq += (r[c] - mean) * (r[c] - mean);
      rm.mean_rank[c] = mean;
      rm.std_dev[c] = std::sqrt(sq / d);
    }
    out.push_back(std::move(rm));
  }
  return out;
}

std::string rank_matrices_to_csv(std::span<const RankMatrix> matrices) {
  std::ostringstream os;
  os << "# mlrules ranks format_version=1\n";
  os << "measure,m,retention,mean_rank,std_dev,best_datasets\n";
  char buf[64];
  for (const auto& rm : matrices) {
    for (std::size_t mi = 0; mi < rm.m_values.size(); ++mi) {
      for (std::size_t ri = 0; ri < rm.retentions.size(); ++ri) {
        const std::size_t c = mi * rm.retentions.size() + ri;
        std::snprintf(buf, sizeof buf, "%.4f,%.4f", rm.mean_rank[c], rm.std_dev[c]);
        std::string best;
        for (std::size_t k = 0; k < rm.best[c].size(); ++k) best += (k ? ";" : "") + rm.best[c][k];
        os << rm.measure << ',' << format_number(rm.m_values[mi]) << ',' << format_number(rm.retentions[ri]) << ','
           << buf << ',' << best << '\n';
      }
    }
  }
  return os.str();
}

std::vector<RankMatrix> rank_matrices_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<RankMatrix> out;
  struct Cell {
    double m, r, mean, sd;
    std::vector<std::string> best;
  };
  std::vector<std::vector<Cell>> raw;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "measure,m,retention,mean_rank,std_dev,best_datasets") {
        throw ParseError(line_no, "unexpected rank CSV header");
      }
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 6) throw ParseError(line_no, "expected 6 columns");
    const auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) throw ParseError(line_no, "invalid number '" + s + "'");
      return v;
    };
    if (out.empty() || out.back().measure != f[0]) {
      out.push_back({});
      out.back().measure = f[0];
      raw.emplace_back();
    }
    Cell cell{num(f[1]), num(f[2]), num(f[3]), num(f[4]), {}};
    std::size_t s = 0;
    while (!f[5].empty() && s <= f[5].size()) {
      const auto semi = f[5].find(';', s);
      cell.best.push_back(f[5].substr(s, semi - s));
      if (semi == std::string::npos) break;
      s = semi + 1;
    }
    raw.back().push_back(std::move(cell));
  }
  if (!header) throw ParseError("rank CSV has no header");
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& rm = out[k];
    for (const auto& c : raw[k]) {
      if (std::find(rm.m_values.begin(), rm.m_values.end(), c.m) == rm.m_values.end()) rm.m_values.push_back(c.m);
      if (std::find(rm.retentions.begin(), rm.retentions.end(), c.r) == rm.retentions.end()) {
        rm.retentions.push_back(c.r);
      }
    }
    const std::size_t cells = rm.m_values.size() * rm.retentions.size();
    if (raw[k].size() != cells) throw ParseError("measure '" + rm.measure + "' has an incomplete grid");
    rm.mean_rank.resize(cells);
    rm.std_dev.resize(cells);
    rm.best.resize(cells);
    for (const auto& c : raw[k]) {
      const auto mi = static_cast<std::size_t>(std::find(rm.m_values.begin(), rm.m_values.end(), c.m) -
                                               rm.m_values.begin());
      const auto ri = static_cast<std::size_t>(std::find(rm.retentions.begin(), rm.retentions.end(), c.r) -
                                               rm.retentions.begin());
      const std::size_t idx = mi * rm.retentions.size() + ri;
      rm.mean_rank[idx] = c.mean;
      rm.std_dev[idx] = c.sd;
      rm.best[idx] = c.best;
    }
    std::vector<std::string> names;
    for (const auto& b : rm.best) names.insert(names.end(), b.begin(), b.end());
    std::sort(names.begin(), names.end());
    rm.datasets = static_cast<std::size_t>(std::unique(names.begin(), names.end()) - names.begin());
  }
  return out;
}

}  // namespace mlrules

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mlrules/rank.hpp"

namespace mlrules {
namespace {

constexpr int kCell = 28;
constexpr int kLeft = 70;
constexpr int kTop = 40;

// light to dark; index 4 holds the best-ranked fifth of the cells
constexpr const char* kShades[5] = {"#f7fbff", "#c6dbef", "#6baed6", "#2171b5", "#08306b"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string m_label(double m) {
  if (m == 0) return "0";
  const double e = std::log2(m);
  if (e == std::floor(e)) return "2^" + std::to_string(static_cast<int>(e));
  return format_number(m);
}

}  // namespace

std::string render_heatmap_svg(const RankMatrix& rm) {
  const int cols = static_cast<int>(rm.m_values.size());
  const int rows = static_cast<int>(rm.retentions.size());
  const int width = kLeft + cols * kCell + 20;
  const int height = kTop + rows * kCell + 110;

  // quintile boundaries of the mean ranks; lower rank is better
  std::vector<double> sorted = rm.mean_rank;
  std::sort(sorted.begin(), sorted.end());
  double cut[4] = {0, 0, 0, 0};
  for (int q = 0; q < 4; ++q) {
    if (!sorted.empty()) {
      cut[q] = sorted[std::min(sorted.size() - 1, static_cast<std::size_t>((q + 1) * sorted.size() / 5))];
    }
  }
  const auto shade = [&](double rank) {
    int step = 4;
    for (int q = 0; q < 4 && rank >= cut[q]; ++q) --step;
    return step;
  };

  std::ostringstream os;
  char buf[256];
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  os << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"13\">" << escape(rm.measure) << ": mean rank over "
     << rm.datasets << " dataset(s)</text>\n";
  for (int r = 0; r < rows; ++r) {
    std::snprintf(buf, sizeof buf, "%.0f%%", rm.retentions[static_cast<std::size_t>(r)] * 100);
    os << "<text x=\"" << (kLeft - 6) << "\" y=\"" << (kTop + r * kCell + kCell / 2 + 4)
       << "\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  for (int c = 0; c < cols; ++c) {
    const int x = kLeft + c * kCell + kCell / 2;
    const int y = kTop + rows * kCell + 10;
    os << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"end\" transform=\"rotate(-60 " << x << ' ' << y
       << ")\">" << m_label(rm.m_values[static_cast<std::size_t>(c)]) << "</text>\n";
  }
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      const std::size_t idx = static_cast<std::size_t>(c) * rm.retentions.size() + static_cast<std::size_t>(r);
      const int step = shade(rm.mean_rank[idx]);
      const int x = kLeft + c * kCell;
      const int y = kTop + r * kCell;
      std::snprintf(buf, sizeof buf, "%.2f (sd %.2f)", rm.mean_rank[idx], rm.std_dev[idx]);
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell
         << "\" fill=\"" << kShades[step] << "\" stroke=\"#ffffff\"><title>" << buf << "</title></rect>\n";
      if (!rm.best[idx].empty()) {
        std::string names;
        for (std::size_t k = 0; k < rm.best[idx].size(); ++k) names += (k ? ", " : "") + rm.best[idx][k];
        os << "<text x=\"" << (x + kCell / 2) << "\" y=\"" << (y + kCell / 2 + 5)
           << "\" text-anchor=\"middle\" font-size=\"14\" fill=\"#d62728\">+<title>best: " << escape(names)
           << "</title></text>\n";
      }
    }
  }
  const int legend_y = height - 30;
  os << "<text x=\"10\" y=\"" << (legend_y + 12) << "\">rank quintile:</text>\n";
  for (int s = 4; s >= 0; --s) {
    const int x = 90 + (4 - s) * 70;
    os << "<rect x=\"" << x << "\" y=\"" << legend_y << "\" width=\"14\" height=\"14\" fill=\"" << kShades[s]
       << "\" stroke=\"#999999\"/>\n";
    os << "<text x=\"" << (x + 18) << "\" y=\"" << (legend_y + 11) << "\">"
       << (s == 4 ? "best" : s == 0 ? "worst" : "") << "</text>\n";
  }
  os << "<text x=\"10\" y=\"" << (legend_y + 26) << "\">rows: retention, columns: m, + marks a dataset's best cell</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace mlrules

#include "sil/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sil/csv.hpp"

namespace sil {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr double kLogFloor = 1e-6;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (header[k] == name) return static_cast<int>(k);
    }
    return -1;
  }
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  t.header = split_csv_line(line);
  for (auto& h : t.header) h = trim(h);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() == t.header.size()) t.rows.push_back(std::move(f));
  }
  return t;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  double map(double v, double a, double b) const {
    const double x = log ? std::log10(v) : v;
    return a + (x - lo) / (hi - lo) * (b - a);
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (int e = static_cast<int>(std::floor(lo)); e <= static_cast<int>(std::ceil(hi)); ++e) {
        if (e >= lo - 1e-12 && e <= hi + 1e-12) out.push_back(std::pow(10.0, e));
      }
      return out;
    }
    for (int k = 0; k <= 5; ++k) out.push_back(lo + (hi - lo) * k / 5.0);
    return out;
  }
};

Axis make_axis(const std::vector<double>& values, bool log) {
  Axis a;
  a.log = log;
  if (values.empty()) {
    a.lo = log ? 0.0 : 0.0;
    a.hi = 1.0;
    return a;
  }
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (log) {
    lo = std::floor(std::log10(lo));
    hi = std::ceil(std::log10(hi));
    if (hi <= lo) hi = lo + 1.0;
  } else if (hi <= lo) {
    hi = lo + 1.0;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

void frame(std::ostringstream& svg, const Axis& x, const Axis& y, const std::string& title,
           const std::string& xlabel, const std::string& ylabel) {
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  svg << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
  svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0)
      << "\" height=\"" << num(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : x.ticks()) {
    const double px = x.map(t, x0, x1);
    svg << "<line x1=\"" << num(px) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(px) << "\" y2=\""
        << num(y0 + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(px) << "\" y=\"" << num(y0 + 20)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }
  for (double t : y.ticks()) {
    const double py = y.map(t, y0, y1);
    svg << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(x0)
        << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }
  svg << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 15)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
  svg << "<text x=\"18\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << num((y0 + y1) / 2) << ")\">" << ylabel << "</text>\n";
}

std::string open_svg() {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
    << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n";
  return s.str();
}

PlotOutput scatter_vs_n(const Table& t, const std::string& value_col, const std::string& title) {
  PlotOutput out;
  std::map<std::string, std::map<double, std::vector<double>>> series;
  if (!t.header.empty()) {
    const int cn = t.column("n");
    const int cv = t.column(value_col);
    const int ca = t.column("arm");
    if (cn < 0 || cv < 0) throw std::invalid_argument("CSV lacks columns n and " + value_col);
    int clamped = 0;
    for (const auto& row : t.rows) {
      double n = 0.0;
      double v = 0.0;
      try {
        n = parse_double(row[cn]);
        v = parse_double(row[cv]);
      } catch (const std::exception&) {
        continue;
      }
      if (!std::isfinite(n) || !std::isfinite(v) || n <= 0.0) continue;
      if (v <= 0.0) {
        v = kLogFloor;
        ++clamped;
      }
      series[ca >= 0 ? row[ca] : std::string("all")][n].push_back(v);
      ++out.points;
    }
    if (clamped > 0) {
      out.warnings.push_back(std::to_string(clamped) + " non-positive values drawn at " +
                             tick_label(kLogFloor));
    }
  }
  if (out.points == 0) out.warnings.push_back("no data points; writing empty axes");

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [arm, by_n] : series) {
    for (const auto& [n, vals] : by_n) {
      xs.push_back(n);
      ys.insert(ys.end(), vals.begin(), vals.end());
    }
  }
  const Axis x = make_axis(xs, true);
  const Axis y = make_axis(ys, true);
  std::ostringstream svg;
  svg << open_svg();
  frame(svg, x, y, title, "n", value_col);
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  int color = 0;
  for (const auto& [arm, by_n] : series) {
    const char* c = kPalette[color % 6];
    std::ostringstream line;
    for (const auto& [n, vals] : by_n) {
      for (double v : vals) {
        svg << "<circle cx=\"" << num(x.map(n, x0, x1)) << "\" cy=\"" << num(y.map(v, y0, y1))
            << "\" r=\"2.5\" fill=\"" << c << "\" fill-opacity=\"0.5\"/>\n";
      }
      std::vector<double> sorted = vals;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t k = sorted.size() / 2;
      const double med = sorted.size() % 2 ? sorted[k] : 0.5 * (sorted[k - 1] + sorted[k]);
      line << (line.tellp() > 0 ? " " : "") << num(x.map(n, x0, x1)) << ',' << num(y.map(med, y0, y1));
    }
    svg << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << c
        << "\" stroke-width=\"2\"/>\n";
    const double ly = kTop + 20.0 + 20.0 * color;
    svg << "<rect x=\"" << num(x1 + 15) << "\" y=\"" << num(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
        << c << "\"/>\n";
    svg << "<text x=\"" << num(x1 + 30) << "\" y=\"" << num(ly) << "\" font-size=\"12\">" << arm
        << " (median)</text>\n";
    ++color;
  }
  svg << "</svg>\n";
  out.svg = svg.str();
  return out;
}

PlotOutput histogram(const Table& t) {
  PlotOutput out;
  std::vector<double> vals;
  if (!t.header.empty()) {
    const int cv = t.column("avg_correlation");
    if (cv < 0) throw std::invalid_argument("CSV lacks column avg_correlation");
    for (const auto& row : t.rows) {
      try {
        const double v = parse_double(row[cv]);
        if (std::isfinite(v)) vals.push_back(v);
      } catch (const std::exception&) {
      }
    }
  }
  out.points = static_cast<int>(vals.size());
  if (vals.empty()) out.warnings.push_back("no data points; writing empty axes");
  const int bins = 20;
  double lo = vals.empty() ? 0.0 : *std::min_element(vals.begin(), vals.end());
  double hi = vals.empty() ? 1.0 : *std::max_element(vals.begin(), vals.end());
  if (hi <= lo) hi = lo + 1.0;
  std::vector<int> counts(bins, 0);
  for (double v : vals) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    counts[std::clamp(b, 0, bins - 1)]++;
  }
  Axis x;
  x.lo = lo;
  x.hi = hi;
  Axis y;
  y.lo = 0.0;
  y.hi = std::max(1, *std::max_element(counts.begin(), counts.end()));
  std::ostringstream svg;
  svg << open_svg();
  frame(svg, x, y, "pairwise average correlation", "avg_correlation", "count");
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  for (int b = 0; b < bins; ++b) {
    if (counts[b] == 0) continue;
    const double left = x.map(lo + (hi - lo) * b / bins, x0, x1);
    const double right = x.map(lo + (hi - lo) * (b + 1) / bins, x0, x1);
    const double top = y.map(counts[b], y0, y1);
    svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
        << "\" height=\"" << num(y0 - top) << "\" fill=\"" << kPalette[0] << "\" stroke=\"white\"/>\n";
  }
  svg << "</svg>\n";
  out.svg = svg.str();
  return out;
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "risk_vs_n") return PlotKind::risk_vs_n;
  if (name == "residual_vs_n") return PlotKind::residual_vs_n;
  if (name == "coherence_hist") return PlotKind::coherence_hist;
  throw std::invalid_argument("unknown plot kind '" + name + "'");
}

PlotOutput render_plot(const std::string& csv_path, PlotKind kind) {
  const Table t = read_table(csv_path);
  switch (kind) {
    case PlotKind::risk_vs_n:
      return scatter_vs_n(t, "excess_risk", "excess risk vs n");
    case PlotKind::residual_vs_n:
      return scatter_vs_n(t, "support_residual", "support residual vs n");
    case PlotKind::coherence_hist:
      return histogram(t);
  }
  throw std::invalid_argument("unknown plot kind");
}

std::vector<std::string> emit_plot(const std::string& csv_path, PlotKind kind,
                                   const std::string& svg_path) {
  PlotOutput p = render_plot(csv_path, kind);
  std::ofstream out(svg_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + svg_path);
  out << p.svg;
  return p.warnings;
}

}  // namespace sil

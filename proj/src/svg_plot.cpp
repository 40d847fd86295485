#include "maestro/svg_plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "maestro/errors.hpp"

namespace maestro {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 160.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string px(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v;
  return out.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Degenerate or empty ranges get a unit span so the mapping stays finite.
  void settle() {
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

void header(std::ostringstream& out, const std::string& title, const Range& x, const Range& y) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" data-x-min=\"" << num(x.lo) << "\" data-x-max=\""
      << num(x.hi) << "\" data-y-min=\"" << num(y.lo) << "\" data-y-max=\"" << num(y.hi) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << escape(title) << "</text>\n";
}

void axes(std::ostringstream& out, const Range& x, const Range& y, const std::string& x_label,
          const std::string& y_label, bool x_ticks) {
  const double left = kMarginLeft;
  const double right = kWidth - kMarginRight;
  const double top = kMarginTop;
  const double bottom = kHeight - kMarginBottom;
  out << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\"" << bottom << "\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom << "\"/>\n";
  out << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double yv = y.lo + f * (y.hi - y.lo);
    const double yp = bottom - f * (bottom - top);
    out << "<text x=\"" << px(left - 6) << "\" y=\"" << px(yp + 4) << "\" text-anchor=\"end\">" << std::setprecision(3)
        << yv << "</text>\n";
    if (x_ticks) {
      const double xv = x.lo + f * (x.hi - x.lo);
      const double xp = left + f * (right - left);
      out << "<text x=\"" << px(xp) << "\" y=\"" << px(bottom + 16) << "\" text-anchor=\"middle\">"
          << std::setprecision(4) << xv << "</text>\n";
    }
  }
  out << "<text x=\"" << px((left + right) / 2) << "\" y=\"" << px(kHeight - 10)
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << px((top + bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << px((top + bottom) / 2) << ")\">" << escape(y_label) << "</text>\n";
  out << "</g>\n";
}

void legend(std::ostringstream& out, const std::vector<std::string>& names) {
  out << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kMarginTop + 16.0 * static_cast<double>(i);
    const double x = kWidth - kMarginRight + 12;
    out << "<rect x=\"" << x << "\" y=\"" << px(y) << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[i % std::size(kPalette)] << "\"/>";
    out << "<text x=\"" << x + 14 << "\" y=\"" << px(y + 9) << "\">" << escape(names[i]) << "</text>\n";
  }
  out << "</g>\n";
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no, 1);
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw ParseError("empty CSV", 0, 0);
  if (table.rows.empty()) throw ParseError("CSV has a header but no rows", line_no, 1);
  return table;
}

double csv_number(const CsvTable& table, std::size_t row, std::size_t col) {
  const std::string& cell = table.rows.at(row).at(col);
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    // Row numbers are 1-based data lines after the header.
    throw ParseError("not a number: '" + cell + "'", row + 2, col + 1);
  }
  return value;
}

std::string render_line_chart(const LineChart& chart) {
  Range x, y;
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw ParameterError("series '" + s.name + "' has mismatched x and y");
    for (double v : s.x) x.add(v);
    for (double v : s.y) y.add(v);
  }
  x.settle();
  y.settle();
  const double left = kMarginLeft;
  const double right = kWidth - kMarginRight;
  const double top = kMarginTop;
  const double bottom = kHeight - kMarginBottom;
  auto map_x = [&](double v) { return left + (v - x.lo) / (x.hi - x.lo) * (right - left); };
  auto map_y = [&](double v) { return bottom - (v - y.lo) / (y.hi - y.lo) * (bottom - top); };

  std::ostringstream out;
  header(out, chart.title, x, y);
  axes(out, x, y, chart.x_label, chart.y_label, true);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const Series& s = chart.series[i];
    names.push_back(s.name);
    std::string d;
    bool pen_down = false;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) {
        pen_down = false;
        continue;
      }
      d += pen_down ? " L" : (d.empty() ? "M" : " M");
      d += px(map_x(s.x[k])) + "," + px(map_y(s.y[k]));
      pen_down = true;
    }
    out << "<path class=\"series\" data-series=\"" << escape(s.name) << "\" fill=\"none\" stroke-width=\"2\" stroke=\""
        << kPalette[i % std::size(kPalette)] << "\" d=\"" << d << "\"/>\n";
  }
  legend(out, names);
  out << "</svg>\n";
  return out.str();
}

std::string render_bar_chart(const BarChart& chart) {
  if (chart.labels.size() != chart.values.size()) throw ParameterError("bar chart labels and values differ in size");
  Range x, y;
  x.add(0.0);
  x.add(static_cast<double>(chart.values.size()));
  y.add(0.0);
  for (double v : chart.values) y.add(v);
  x.settle();
  y.settle();
  const double left = kMarginLeft;
  const double right = kWidth - kMarginRight;
  const double top = kMarginTop;
  const double bottom = kHeight - kMarginBottom;
  auto map_y = [&](double v) { return bottom - (v - y.lo) / (y.hi - y.lo) * (bottom - top); };
  const double slot = (right - left) / std::max<std::size_t>(chart.values.size(), 1);

  std::ostringstream out;
  header(out, chart.title, x, y);
  axes(out, x, y, "", chart.y_label, false);
  for (std::size_t i = 0; i < chart.values.size(); ++i) {
    const double x0 = left + slot * (static_cast<double>(i) + 0.15);
    const double x1 = left + slot * (static_cast<double>(i) + 0.85);
    const double y0 = map_y(0.0);
    const double y1 = map_y(chart.values[i]);
    out << "<path class=\"series\" data-series=\"" << escape(chart.labels[i]) << "\" data-value=\""
        << num(chart.values[i]) << "\" fill=\"" << kPalette[i % std::size(kPalette)] << "\" d=\"M" << px(x0) << ','
        << px(y0) << " L" << px(x0) << ',' << px(y1) << " L" << px(x1) << ',' << px(y1) << " L" << px(x1) << ','
        << px(y0) << " Z\"/>\n";
  }
  legend(out, chart.labels);
  out << "</svg>\n";
  return out.str();
}

LineChart line_chart_from_csv(const CsvTable& table, const std::string& title) {
  if (table.header.size() < 2) throw ParseError("need an x column and at least one series column", 1, 1);
  LineChart chart;
  chart.title = title;
  chart.x_label = table.header[0];
  std::vector<double> xs;
  for (std::size_t r = 0; r < table.rows.size(); ++r) xs.push_back(csv_number(table, r, 0));
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    Series s{table.header[c], xs, {}};
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      // Blank cells are gaps in the line.
      s.y.push_back(table.rows[r][c].empty() ? std::numeric_limits<double>::quiet_NaN() : csv_number(table, r, c));
    }
    chart.series.push_back(std::move(s));
  }
  return chart;
}

}  // namespace maestro

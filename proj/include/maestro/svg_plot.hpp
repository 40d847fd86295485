#pragma once

#include <istream>
#include <string>
#include <vector>

namespace maestro {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1.
  int column(const std::string& name) const;
};

// Plain comma-separated values without quoting. Throws ParseError on an empty
// input, a header without rows, or a ragged row.
CsvTable read_csv(std::istream& in);

// Parses a numeric cell; throws ParseError naming the row and column.
double csv_number(const CsvTable& table, std::size_t row, std::size_t col);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

// One <path class="series"> per series. The root element carries the axis
// ranges as data-x-min, data-x-max, data-y-min and data-y-max.
std::string render_line_chart(const LineChart& chart);

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> labels;
  std::vector<double> values;
};

// One <path class="series"> per bar.
std::string render_bar_chart(const BarChart& chart);

// First column is x, every other column one series.
LineChart line_chart_from_csv(const CsvTable& table, const std::string& title);

}  // namespace maestro

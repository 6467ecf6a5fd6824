#pragma once

#include <string>
#include <vector>

#include "kkdre/experiments.hpp"

namespace kkdre {

// Column order of the results table. A trailing "error" column carries the
// failure message of a point (empty on success).
const std::vector<std::string>& csv_columns();

// Numbers use 12 significant digits; OFF values are written as "off",
// booleans as 1/0, failed metrics as "nan".
std::string to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);

// Writes to_csv(rows); raises IoFailure on empty input (no file is created)
// or when the file cannot be written.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool fec_line = false;  // horizontal line at the NGMI threshold
};

std::string to_svg(const Plot& plot);
void emit_svg(const Plot& plot, const std::string& path);

}  // namespace kkdre

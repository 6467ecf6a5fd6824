#include "kkdre/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "kkdre/error.hpp"
#include "kkdre/metrics.hpp"

namespace kkdre {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_num(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error(Errc::InvalidArgument, "bad number '" + s + "' in CSV");
  return v;
}

std::string xml_escape(const std::string& s) {
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

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "run_id", "dac_bits", "dre_enabled", "cspr_target_db", "cspr_measured_db", "osnr_db", "fiber_km", "snr_db",
      "gmi_bits", "ngmi", "ber", "clipped_fraction", "chosen_bias", "seed", "error"};
  return cols;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    os << quote(r.run_id) << ',' << (r.dac_bits ? std::to_string(*r.dac_bits) : "off") << ','
       << (r.dre_enabled ? 1 : 0) << ',' << num(r.cspr_target_db) << ',' << num(r.cspr_measured_db) << ','
       << (r.osnr_db ? num(*r.osnr_db) : "off") << ',' << num(r.fiber_km) << ',' << num(r.snr_db) << ','
       << num(r.gmi_bits) << ',' << num(r.ngmi) << ',' << num(r.ber) << ',' << num(r.clipped_fraction) << ','
       << num(r.chosen_bias) << ',' << r.seed << ',' << quote(r.error) << '\n';
  }
  return os.str();
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::EmptyInput, "CSV has no header");
  if (split_line(line) != csv_columns()) throw Error(Errc::InvalidArgument, "unexpected CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != csv_columns().size()) throw Error(Errc::InvalidArgument, "wrong field count in CSV row");
    ResultRow r;
    r.run_id = f[0];
    if (f[1] != "off") r.dac_bits = static_cast<int>(parse_num(f[1]));
    r.dre_enabled = f[2] == "1";
    r.cspr_target_db = parse_num(f[3]);
    r.cspr_measured_db = parse_num(f[4]);
    if (f[5] != "off") r.osnr_db = parse_num(f[5]);
    r.fiber_km = parse_num(f[6]);
    r.snr_db = parse_num(f[7]);
    r.gmi_bits = parse_num(f[8]);
    r.ngmi = parse_num(f[9]);
    r.ber = parse_num(f[10]);
    r.clipped_fraction = parse_num(f[11]);
    r.chosen_bias = parse_num(f[12]);
    r.seed = std::stoull(f[13]);
    r.error = f[14];
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  if (rows.empty()) throw Error(Errc::IoFailure, "no rows to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot open '" + path + "' for writing");
  out << to_csv(rows);
  if (!out) throw Error(Errc::IoFailure, "write to '" + path + "' failed");
}

std::string to_svg(const Plot& plot) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (plot.fec_line) {
    y0 = std::min(y0, kFecNgmiThreshold);
    y1 = std::max(y1, kFecNgmiThreshold);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  std::ostringstream os;
  char buf[256];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(plot.title) << "</text>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L, T,
                W - L - R, H - T - B);
  os << buf;
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.4g</text>\n", px(xv), H - B + 16, xv);
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.4g</text>\n", L - 6, py(yv) + 4, yv);
    os << buf;
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xml_escape(plot.x_label)
     << "</text>\n";
  os << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << xml_escape(plot.y_label) << "</text>\n";
  if (plot.fec_line) {
    std::snprintf(buf, sizeof buf,
                  "<line class=\"fec\" x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n"
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" fill=\"gray\">FEC 0.92</text>\n",
                  L, py(kFecNgmiThreshold), W - R, py(kFecNgmiThreshold), W - R - 4, py(kFecNgmiThreshold) - 4);
    os << buf;
  }
  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const auto& ser = plot.series[s];
    const char* color = colors[s % 8];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(ser.x[i]), py(ser.y[i]));
      os << buf;
    }
    os << "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" fill=\"%s\">%s</text>\n", L + 8, T + 16 + 14.0 * s, color,
                  xml_escape(ser.name).c_str());
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

void emit_svg(const Plot& plot, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot open '" + path + "' for writing");
  out << to_svg(plot);
  if (!out) throw Error(Errc::IoFailure, "write to '" + path + "' failed");
}

}  // namespace kkdre

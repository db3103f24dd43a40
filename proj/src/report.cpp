#include "dtc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "dtc/linalg.hpp"

namespace dtc {

std::string version() { return DTC_VERSION; }

std::uint64_t fnv1a(const std::string& data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string comment_header(const std::string& config_hash, const std::vector<std::string>& extra) {
  std::string s = "# dtcsim " + version() + " config_hash=" + config_hash + "\n";
  for (const auto& e : extra) s += "# " + e + "\n";
  return s;
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) throw Error("csv row has wrong number of cells");
  rows_.push_back(cells);
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  for (double v : values) cells.push_back(fmt(v));
  add_row(cells);
}

std::string CsvTable::str(const std::string& header) const {
  std::ostringstream out;
  out << header;
  for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
  out << "\n";
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << "\n";
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

// Header lines travel as an XML comment so the SVG stays valid.
std::string svg_open(int w, int h, const std::string& header) {
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!--\n" << header << "-->\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return o.str();
}

std::string colour(double t) {
  // Blue -> white -> red.
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    double u = t / 0.5;
    r = int(40 + u * 215);
    g = int(70 + u * 185);
    b = 200 + int(u * 55);
  } else {
    double u = (t - 0.5) / 0.5;
    r = 255;
    g = int(255 - u * 205);
    b = int(255 - u * 215);
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string svg_heatmap(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::vector<double>>& values, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel, const std::string& header) {
  const int W = 560, H = 500, L = 70, T = 40, PW = 400, PH = 400;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& row : values)
    for (double v : row)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!(hi > lo)) hi = lo + 1.0;
  std::ostringstream o;
  o << svg_open(W, H, header);
  o << "<text x=\"" << L << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  const double cw = double(PW) / std::max<std::size_t>(1, x.size());
  const double ch = double(PH) / std::max<std::size_t>(1, y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      double v = values[i][j];
      std::string fill = std::isfinite(v) ? colour((v - lo) / (hi - lo)) : "#999999";
      o << "<rect x=\"" << fmt(L + i * cw) << "\" y=\"" << fmt(T + PH - (j + 1) * ch) << "\" width=\""
        << fmt(cw + 0.3) << "\" height=\"" << fmt(ch + 0.3) << "\" fill=\"" << fill << "\"/>\n";
    }
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << PW << "\" height=\"" << PH
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (!x.empty()) {
    o << "<text x=\"" << L << "\" y=\"" << T + PH + 16 << "\">" << fmt(x.front()) << "</text>\n";
    o << "<text x=\"" << L + PW << "\" y=\"" << T + PH + 16 << "\" text-anchor=\"end\">" << fmt(x.back())
      << "</text>\n";
  }
  if (!y.empty()) {
    o << "<text x=\"" << L - 6 << "\" y=\"" << T + PH << "\" text-anchor=\"end\">" << fmt(y.front())
      << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << T + 10 << "\" text-anchor=\"end\">" << fmt(y.back())
      << "</text>\n";
  }
  o << "<text x=\"" << L + PW / 2 << "\" y=\"" << T + PH + 34 << "\" text-anchor=\"middle\">" << xlabel
    << "</text>\n";
  o << "<text transform=\"translate(20," << T + PH / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel
    << "</text>\n";
  // Colour bar.
  for (int k = 0; k < 50; ++k)
    o << "<rect x=\"" << L + PW + 20 << "\" y=\"" << T + PH - (k + 1) * 8 << "\" width=\"16\" height=\"8\" fill=\""
      << colour(k / 49.0) << "\"/>\n";
  o << "<text x=\"" << L + PW + 40 << "\" y=\"" << T + PH << "\">" << fmt(lo) << "</text>\n";
  o << "<text x=\"" << L + PW + 40 << "\" y=\"" << T + 10 << "\">" << fmt(hi) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string svg_lines(const std::vector<double>& x, const std::vector<Series>& series, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel, bool log_y, const std::string& header) {
  const int W = 640, H = 420, L = 70, T = 40, PW = 440, PH = 320;
  auto tr = [&](double v) { return log_y ? std::log10(std::max(v, 1e-16)) : v; };
  double xlo = x.empty() ? 0 : x.front(), xhi = x.empty() ? 1 : x.back();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series)
    for (double v : s.y)
      if (std::isfinite(tr(v))) {
        lo = std::min(lo, tr(v));
        hi = std::max(hi, tr(v));
      }
  if (!(hi > lo)) hi = lo + 1.0;
  if (!(xhi > xlo)) xhi = xlo + 1.0;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  std::ostringstream o;
  o << svg_open(W, H, header);
  o << "<text x=\"" << L << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << PW << "\" height=\"" << PH
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    o << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << palette[k % 7] << "\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < series[k].y.size(); ++i) {
      double v = tr(series[k].y[i]);
      if (!std::isfinite(v)) continue;
      o << fmt(L + (x[i] - xlo) / (xhi - xlo) * PW) << "," << fmt(T + PH - (v - lo) / (hi - lo) * PH) << " ";
    }
    o << "\"/>\n";
    o << "<text x=\"" << L + PW + 10 << "\" y=\"" << T + 14 + 16 * k << "\" fill=\"" << palette[k % 7] << "\">"
      << series[k].name << "</text>\n";
  }
  o << "<text x=\"" << L << "\" y=\"" << T + PH + 16 << "\">" << fmt(xlo) << "</text>\n";
  o << "<text x=\"" << L + PW << "\" y=\"" << T + PH + 16 << "\" text-anchor=\"end\">" << fmt(xhi) << "</text>\n";
  o << "<text x=\"" << L - 6 << "\" y=\"" << T + PH << "\" text-anchor=\"end\">" << (log_y ? "1e" : "") << fmt(lo)
    << "</text>\n";
  o << "<text x=\"" << L - 6 << "\" y=\"" << T + 10 << "\" text-anchor=\"end\">" << (log_y ? "1e" : "") << fmt(hi)
    << "</text>\n";
  o << "<text x=\"" << L + PW / 2 << "\" y=\"" << T + PH + 34 << "\" text-anchor=\"middle\">" << xlabel
    << "</text>\n";
  o << "<text transform=\"translate(20," << T + PH / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel
    << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

nlohmann::json make_manifest(const std::string& command, const std::string& config_hash, std::uint64_t seed,
                             double wall_seconds, const std::vector<std::string>& outputs) {
  return {{"tool", "dtcsim"},
          {"version", version()},
          {"command", command},
          {"config_hash", config_hash},
          {"seed", seed},
          {"wall_time_s", wall_seconds},
          {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
          {"outputs", outputs}};
}

}  // namespace dtc

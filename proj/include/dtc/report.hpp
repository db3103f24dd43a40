#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace dtc {

std::string version();
std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
std::string fmt(double v);  // %.12g, locale independent

// "# tool x.y.z config_hash=..." followed by optional extra comment lines.
std::string comment_header(const std::string& config_hash, const std::vector<std::string>& extra = {});

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add_row(const std::vector<std::string>& cells);
  void add_row(const std::vector<double>& values);
  std::string str(const std::string& header) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// Heat map of values[i1][i2]; NaN cells are drawn grey.
std::string svg_heatmap(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::vector<double>>& values, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel, const std::string& header);

struct Series {
  std::string name;
  std::vector<double> y;
};
std::string svg_lines(const std::vector<double>& x, const std::vector<Series>& series, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel, bool log_y, const std::string& header);

nlohmann::json make_manifest(const std::string& command, const std::string& config_hash, std::uint64_t seed,
                             double wall_seconds, const std::vector<std::string>& outputs);

}  // namespace dtc

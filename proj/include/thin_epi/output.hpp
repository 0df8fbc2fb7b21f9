#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace thin_epi {

// 17 significant digits, so values round-trip exactly.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& values);
  void add_row(std::vector<std::string> cells);
  std::string to_string() const;
  void write(const std::filesystem::path& path) const;
  int column(const std::string& name) const;  // -1 when absent
  std::vector<double> numeric_column(const std::string& name) const;
  static CsvTable read(const std::filesystem::path& path);
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
  bool markers = false;  // scatter instead of polyline
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<PlotSeries> series;
};

std::string render_svg(const PlotSpec& spec);
// Histogram of `values` with `bins` equal cells.
std::string render_histogram_svg(const std::string& title, const std::string& xlabel,
                                 const std::vector<double>& values, int bins = 30);

enum class PlotKind { Frequency, Blowup, Slack };

// Reads a CSV artifact and writes the matching SVG next to it.
std::filesystem::path emit_plot(const std::filesystem::path& csv, PlotKind kind);

}  // namespace thin_epi

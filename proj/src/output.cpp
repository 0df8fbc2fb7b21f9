#include "thin_epi/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "thin_epi/core.hpp"

namespace thin_epi {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_row(std::move(cells));
}

void CsvTable::add_row(std::vector<std::string> cells) {
  require(cells.size() == header.size(), "CsvTable: row width does not match the header");
  rows.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot write " + path.string());
  f << to_string();
}

int CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const int c = column(name);
  if (c < 0) fail(ErrorCode::InvalidArgument, "CSV has no column '" + name + "'");
  std::vector<double> out;
  for (const auto& r : rows) {
    try {
      out.push_back(std::stod(r[c]));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "CSV column '" + name + "' holds a non-numeric cell: " + r[c]);
    }
  }
  return out;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::Io, "cannot read " + path.string());
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable t;
  std::string line;
  if (!std::getline(f, line) || line.empty()) fail(ErrorCode::InvalidArgument, "empty CSV: " + path.string());
  t.header = split(line);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      fail(ErrorCode::InvalidArgument, "malformed CSV row in " + path.string() + ": " + line);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::Io, "SHA-256 computation failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return sha256_hex(os.str());
}

namespace {

constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.logx || x > 0) && (!spec.logy || y > 0);
  };
  for (const auto& s : spec.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!std::isfinite(x0)) fail(ErrorCode::InvalidArgument, "render_svg: no plottable points");
  if (x1 - x0 < 1e-300) x1 = x0 + 1, x0 -= 1;
  if (y1 - y0 < 1e-300) y1 = y0 + 1, y0 -= 1;
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  auto px = [&](double v) { return kL + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return kT + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    double gx = kL + pw * i / 4.0, gy = kT + ph - ph * i / 4.0;
    os << "<text x=\"" << gx << "\" y=\"" << kT + ph + 16 << "\" text-anchor=\"middle\">"
       << (spec.logx ? "1e" + num(fx) : num(fx)) << "</text>\n";
    os << "<text x=\"" << kL - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">"
       << (spec.logy ? "1e" + num(fy) : num(fy)) << "</text>\n";
  }
  os << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << escape(spec.xlabel)
     << "</text>\n";
  os << "<text transform=\"translate(16," << kT + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(spec.ylabel) << "</text>\n";
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kColors[k % 6];
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (usable(s.x[i], s.y[i]))
          os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (usable(s.x[i], s.y[i])) os << px(s.x[i]) << "," << py(s.y[i]) << " ";
      os << "\"/>\n";
    }
    os << "<text x=\"" << kL + 10 << "\" y=\"" << kT + 16 + 14 * k << "\" fill=\"" << color << "\">" << escape(s.name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_histogram_svg(const std::string& title, const std::string& xlabel,
                                 const std::vector<double>& values, int bins) {
  require(!values.empty() && bins > 0, "render_histogram_svg: no values");
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (hi - lo < 1e-300) hi = lo + 1;
  std::vector<int> count(bins, 0);
  for (double v : values) count[std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins))]++;
  const int top = *std::max_element(count.begin(), count.end());
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (int b = 0; b < bins; ++b) {
    double h = ph * count[b] / top;
    os << "<rect x=\"" << kL + pw * b / bins << "\" y=\"" << kT + ph - h << "\" width=\"" << pw / bins - 1
       << "\" height=\"" << h << "\" fill=\"" << kColors[0] << "\"/>\n";
  }
  os << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kL << "\" y=\"" << kT + ph + 16 << "\" text-anchor=\"middle\">" << num(lo) << "</text>\n";
  os << "<text x=\"" << kL + pw << "\" y=\"" << kT + ph + 16 << "\" text-anchor=\"middle\">" << num(hi) << "</text>\n";
  os << "<text x=\"" << kL - 6 << "\" y=\"" << kT + 4 << "\" text-anchor=\"end\">" << top << "</text>\n";
  os << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << escape(xlabel)
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::filesystem::path emit_plot(const std::filesystem::path& csv, PlotKind kind) {
  CsvTable t = CsvTable::read(csv);
  if (t.rows.empty()) fail(ErrorCode::InvalidArgument, "emit_plot: CSV has no data rows: " + csv.string());
  std::filesystem::path out = csv;
  out.replace_extension(".svg");
  std::string svg;
  switch (kind) {
    case PlotKind::Frequency: {
      PlotSpec s{"Truncated frequency", "r", "Phi(r)", true, false, {}};
      s.series.push_back({"Phi", t.numeric_column("r"), t.numeric_column("Phi"), false});
      svg = render_svg(s);
      break;
    }
    case PlotKind::Blowup: {
      PlotSpec s{"Distance to the blow-up", "r", "||v_r - p||", true, true, {}};
      auto r = t.numeric_column("r");
      s.series.push_back({"L2 distance", r, t.numeric_column("l2_distance"), true});
      if (t.column("fit") >= 0) s.series.push_back({"fit", r, t.numeric_column("fit"), false});
      svg = render_svg(s);
      break;
    }
    case PlotKind::Slack:
      svg = render_histogram_svg("Epiperimetric slack", "slack", t.numeric_column("slack"));
      break;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot write " + out.string());
  f << svg;
  return out;
}

}  // namespace thin_epi

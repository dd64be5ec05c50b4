#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ds_cli {

// 17 significant digits round-trip every double; non-finite values are
// written as inf / -inf / nan, which strtod reads back.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// A CSV table: '# format: <tag>' line, header row, then rows.  Cells are
// plain strings; numeric cells go through num().
struct Table {
  std::string format;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> r) {
    if (r.size() != header.size()) throw std::logic_error("row width does not match header");
    rows.push_back(std::move(r));
  }

  std::string csv() const {
    std::ostringstream os;
    os << "# format: " << format << "\n";
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << "\n";
    }
    return os.str();
  }
};

inline Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  while (std::getline(is, line)) {
    if (line.rfind("# format: ", 0) == 0) {
      t.format = line.substr(10);
      continue;
    }
    if (line.empty()) continue;
    if (t.header.empty())
      t.header = split(line);
    else
      t.rows.push_back(split(line));
  }
  return t;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------
// Minimal deterministic SVG plotter: panels on a grid, each with a frame,
// five ticks per axis and polylines.  Layout: 420x320 px per panel, plot
// area inset 60/20/30/40 (left/right/top/bottom).

struct Curve {
  std::string label;
  std::string style;  // solid, dashed, dotted, dashdot, longdash
  int color = 0;
  std::vector<std::pair<double, double>> pts;
};

struct Panel {
  std::string title;
  std::vector<Curve> curves;
  double x_lo = NAN, x_hi = NAN, y_lo = NAN, y_hi = NAN;  // NaN: from data
  bool log_y = false;
};

inline std::string svg_render(const std::vector<Panel>& panels, int cols) {
  static const char* palette[] = {"#000000", "#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#7f8c8d"};
  auto dash = [](const std::string& s) -> std::string {
    if (s == "dashed") return " stroke-dasharray=\"6,4\"";
    if (s == "dotted") return " stroke-dasharray=\"1.5,3\"";
    if (s == "dashdot") return " stroke-dasharray=\"6,3,1.5,3\"";
    if (s == "longdash") return " stroke-dasharray=\"12,5\"";
    return "";
  };
  const int W = 420, H = 320, L = 60, R = 20, T = 30, B = 40;
  int rows = int((panels.size() + cols - 1) / cols);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W * cols << "\" height=\"" << H * rows
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char buf[64];
  auto f2 = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto tick = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  for (size_t p = 0; p < panels.size(); ++p) {
    const auto& pn = panels[p];
    double ox = double(p % cols) * W, oy = double(p / cols) * H;
    auto ty = [&](double y) { return pn.log_y ? std::log10(y) : y; };
    double xl = pn.x_lo, xh = pn.x_hi, yl = pn.y_lo, yh = pn.y_hi;
    double dxl = INFINITY, dxh = -INFINITY, dyl = INFINITY, dyh = -INFINITY;
    for (const auto& c : pn.curves)
      for (auto [x, y] : c.pts) {
        if (!std::isfinite(x) || !std::isfinite(ty(y))) continue;
        dxl = std::min(dxl, x);
        dxh = std::max(dxh, x);
        dyl = std::min(dyl, ty(y));
        dyh = std::max(dyh, ty(y));
      }
    if (std::isnan(xl)) xl = dxl;
    if (std::isnan(xh)) xh = dxh;
    if (std::isnan(yl)) yl = dyl;
    if (std::isnan(yh)) yh = dyh;
    if (!(xh > xl)) xh = xl + 1.0;
    if (!(yh > yl)) yh = yl + 1.0;
    const double pw = W - L - R, ph = H - T - B;
    auto X = [&](double x) { return ox + L + (x - xl) / (xh - xl) * pw; };
    auto Y = [&](double y) { return oy + T + (1.0 - (ty(y) - yl) / (yh - yl)) * ph; };
    os << "<g>\n<text x=\"" << f2(ox + L) << "\" y=\"" << f2(oy + 18) << "\">" << pn.title << "</text>\n";
    os << "<rect x=\"" << f2(ox + L) << "\" y=\"" << f2(oy + T) << "\" width=\"" << f2(pw) << "\" height=\"" << f2(ph)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      double xv = xl + (xh - xl) * i / 4.0, yv = yl + (yh - yl) * i / 4.0;
      double px = ox + L + pw * i / 4.0, py = oy + T + ph * (1.0 - i / 4.0);
      os << "<line x1=\"" << f2(px) << "\" y1=\"" << f2(oy + T + ph) << "\" x2=\"" << f2(px) << "\" y2=\""
         << f2(oy + T + ph + 4) << "\" stroke=\"black\"/>";
      os << "<text x=\"" << f2(px) << "\" y=\"" << f2(oy + T + ph + 16) << "\" text-anchor=\"middle\">" << tick(xv)
         << "</text>\n";
      os << "<line x1=\"" << f2(ox + L - 4) << "\" y1=\"" << f2(py) << "\" x2=\"" << f2(ox + L) << "\" y2=\"" << f2(py)
         << "\" stroke=\"black\"/>";
      os << "<text x=\"" << f2(ox + L - 6) << "\" y=\"" << f2(py + 4) << "\" text-anchor=\"end\">"
         << (pn.log_y ? tick(std::pow(10.0, yv)) : tick(yv)) << "</text>\n";
    }
    // Clip to the frame so clamped potentials do not spill over.
    os << "<clipPath id=\"c" << p << "\"><rect x=\"" << f2(ox + L) << "\" y=\"" << f2(oy + T) << "\" width=\"" << f2(pw)
       << "\" height=\"" << f2(ph) << "\"/></clipPath>\n";
    for (const auto& c : pn.curves) {
      os << "<polyline clip-path=\"url(#c" << p << ")\" fill=\"none\" stroke=\"" << palette[c.color % 7]
         << "\" stroke-width=\"1.2\"" << dash(c.style) << " points=\"";
      bool first = true;
      for (auto [x, y] : c.pts) {
        if (!std::isfinite(x) || !std::isfinite(ty(y))) continue;
        double py = std::clamp(Y(y), oy - 1000.0, oy + H + 1000.0);
        os << (first ? "" : " ") << f2(X(x)) << "," << f2(py);
        first = false;
      }
      os << "\"><title>" << c.label << "</title></polyline>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ds_cli

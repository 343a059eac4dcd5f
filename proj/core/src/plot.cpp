#include "rsdf/plot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "rsdf/png_io.hpp"

namespace rsdf {

namespace {

// 5x7 bitmap glyphs, one byte per row, low 5 bits used (bit 4 = left column).
// Digits, uppercase letters, and the handful of symbols axis labels need;
// lowercase input is folded to uppercase.
struct Glyph {
  char ch;
  std::uint8_t rows[7];
};

const Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'-', {0x00, 0x00, 0x00, 0x0E, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
    {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
    {'%', {0x19, 0x19, 0x02, 0x04, 0x08, 0x13, 0x13}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
};

const std::uint8_t* glyph_rows(char c) {
  const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const Glyph& g : kFont)
    if (g.ch == up) return g.rows;
  return kFont[std::size(kFont) - 1].rows;  // unknown -> blank
}

struct Rgb {
  std::uint8_t r, g, b;
};

const Rgb kPalette[] = {
    {214, 39, 40}, {31, 119, 180}, {44, 160, 44},  {255, 127, 14},
    {148, 103, 189}, {140, 86, 75}, {23, 190, 207}, {127, 127, 127},
};

Rgb series_color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

void put_pixel(Image& img, int u, int v, Rgb c) {
  if (u < 0 || v < 0 || u >= img.width || v >= img.height) return;
  img.at(u, v, 0) = c.r;
  img.at(u, v, 1) = c.g;
  img.at(u, v, 2) = c.b;
}

void draw_line(Image& img, double x0, double y0, double x1, double y1, Rgb c) {
  const int steps = static_cast<int>(std::max(std::abs(x1 - x0), std::abs(y1 - y0))) + 1;
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    put_pixel(img, static_cast<int>(std::lround(x0 + t * (x1 - x0))),
              static_cast<int>(std::lround(y0 + t * (y1 - y0))), c);
  }
}

void draw_text(Image& img, int x, int y, const std::string& text, Rgb c) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    const std::uint8_t* rows = glyph_rows(text[i]);
    const int gx = x + static_cast<int>(i) * 6;
    for (int r = 0; r < 7; ++r)
      for (int col = 0; col < 5; ++col)
        if (rows[r] & (1 << (4 - col))) put_pixel(img, gx + col, y + r, c);
  }
}

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Frame {
  int left, right, top, bottom;   // plot rectangle in pixels
  double x_min, x_max, y_min, y_max;
  bool log_y;

  double px(double x) const {
    const double span = x_max > x_min ? x_max - x_min : 1.0;
    return left + (x - x_min) / span * (right - left);
  }
  double py(double y) const {
    const double lo = log_y ? std::log10(y_min) : y_min;
    const double hi = log_y ? std::log10(y_max) : y_max;
    const double v = log_y ? std::log10(std::max(y, 1e-300)) : y;
    const double span = hi > lo ? hi - lo : 1.0;
    return bottom - (v - lo) / span * (bottom - top);
  }
};

void validate_spec(const PlotSpec& spec) {
  if (spec.series.empty()) throw std::invalid_argument("plot: no series");
  for (const PlotSeries& s : spec.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot: x/y length mismatch");
    if (s.x.size() < 2) throw std::invalid_argument("plot: series needs at least 2 points");
  }
}

Frame make_frame(const PlotSpec& spec) {
  Frame f;
  f.left = 64;
  f.right = spec.width - 16;
  f.top = 28;
  f.bottom = spec.height - 40;
  f.log_y = spec.log_y;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const PlotSeries& s : spec.series) {
    for (double v : s.x) {
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
    for (double v : s.y) {
      if (spec.log_y && v <= 0.0) continue;
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (!(y_min <= y_max)) {  // all points filtered out (log scale of nonpositive data)
    y_min = 0.1;
    y_max = 1.0;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
    if (spec.log_y) y_min = std::max(y_min, y_max / 10.0);
  }
  f.x_min = x_min;
  f.x_max = x_max;
  f.y_min = y_min;
  f.y_max = y_max;
  return f;
}

double tick_value(const Frame& f, int i, int n, bool y_axis) {
  const double t = static_cast<double>(i) / (n - 1);
  if (y_axis && f.log_y) {
    const double lo = std::log10(f.y_min), hi = std::log10(f.y_max);
    return std::pow(10.0, lo + t * (hi - lo));
  }
  return y_axis ? f.y_min + t * (f.y_max - f.y_min) : f.x_min + t * (f.x_max - f.x_min);
}

}  // namespace

void write_plot_png(const PlotSpec& spec, const std::string& path) {
  validate_spec(spec);
  const Frame f = make_frame(spec);
  const Rgb black{0, 0, 0};
  const Rgb grey{210, 210, 210};

  Image img = Image::create(spec.width, spec.height, 3, 255);

  constexpr int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    // vertical gridline + x tick
    const double xv = tick_value(f, i, kTicks, false);
    const int u = static_cast<int>(std::lround(f.px(xv)));
    draw_line(img, u, f.top, u, f.bottom, grey);
    const std::string xs = format_tick(xv);
    draw_text(img, u - static_cast<int>(xs.size()) * 3, f.bottom + 6, xs, black);

    const double yv = tick_value(f, i, kTicks, true);
    const int v = static_cast<int>(std::lround(f.py(yv)));
    draw_line(img, f.left, v, f.right, v, grey);
    const std::string ys = format_tick(yv);
    draw_text(img, f.left - 6 - static_cast<int>(ys.size()) * 6, v - 3, ys, black);
  }

  draw_line(img, f.left, f.top, f.left, f.bottom, black);
  draw_line(img, f.left, f.bottom, f.right, f.bottom, black);

  draw_text(img, f.left + ((f.right - f.left) - static_cast<int>(spec.title.size()) * 6) / 2, 10,
            spec.title, black);
  draw_text(img,
            f.left + ((f.right - f.left) - static_cast<int>(spec.x_label.size()) * 6) / 2,
            spec.height - 14, spec.x_label, black);
  draw_text(img, 4, f.top - 12, spec.y_label, black);

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const PlotSeries& ser = spec.series[s];
    const Rgb c = series_color(s);
    for (std::size_t i = 1; i < ser.x.size(); ++i) {
      draw_line(img, f.px(ser.x[i - 1]), f.py(ser.y[i - 1]), f.px(ser.x[i]), f.py(ser.y[i]), c);
      // second pass one pixel down thickens the stroke
      draw_line(img, f.px(ser.x[i - 1]), f.py(ser.y[i - 1]) + 1, f.px(ser.x[i]),
                f.py(ser.y[i]) + 1, c);
    }
  }

  // legend, top-right inside the frame
  int lw = 0;
  for (const PlotSeries& s : spec.series) lw = std::max(lw, static_cast<int>(s.label.size()));
  const int legend_w = 30 + lw * 6;
  const int lx = f.right - legend_w - 6;
  int ly = f.top + 6;
  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const Rgb c = series_color(s);
    draw_line(img, lx, ly + 3, lx + 18, ly + 3, c);
    draw_line(img, lx, ly + 4, lx + 18, ly + 4, c);
    draw_text(img, lx + 24, ly, spec.series[s].label, black);
    ly += 12;
  }

  write_png(path, img);
}

void write_plot_svg(const PlotSpec& spec, const std::string& path) {
  validate_spec(spec);
  const Frame f = make_frame(spec);

  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_plot_svg: cannot open " + path);

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
     << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    const double xv = tick_value(f, i, kTicks, false);
    const double u = f.px(xv);
    os << "<line x1=\"" << u << "\" y1=\"" << f.top << "\" x2=\"" << u << "\" y2=\"" << f.bottom
       << "\" stroke=\"#d2d2d2\"/>\n";
    os << "<text x=\"" << u << "\" y=\"" << f.bottom + 16
       << "\" font-size=\"11\" text-anchor=\"middle\">" << format_tick(xv) << "</text>\n";
    const double yv = tick_value(f, i, kTicks, true);
    const double v = f.py(yv);
    os << "<line x1=\"" << f.left << "\" y1=\"" << v << "\" x2=\"" << f.right << "\" y2=\"" << v
       << "\" stroke=\"#d2d2d2\"/>\n";
    os << "<text x=\"" << f.left - 6 << "\" y=\"" << v + 4
       << "\" font-size=\"11\" text-anchor=\"end\">" << format_tick(yv) << "</text>\n";
  }

  os << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\""
     << f.bottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << f.left << "\" y1=\"" << f.bottom << "\" x2=\"" << f.right << "\" y2=\""
     << f.bottom << "\" stroke=\"black\"/>\n";

  os << "<text x=\"" << (f.left + f.right) / 2 << "\" y=\"18\" font-size=\"14\" "
     << "text-anchor=\"middle\">" << spec.title << "</text>\n";
  os << "<text x=\"" << (f.left + f.right) / 2 << "\" y=\"" << spec.height - 8
     << "\" font-size=\"12\" text-anchor=\"middle\">" << spec.x_label << "</text>\n";
  os << "<text x=\"14\" y=\"" << (f.top + f.bottom) / 2 << "\" font-size=\"12\" "
     << "text-anchor=\"middle\" transform=\"rotate(-90 14 " << (f.top + f.bottom) / 2 << ")\">"
     << spec.y_label << "</text>\n";

  const char* hex[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                       "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const PlotSeries& ser = spec.series[s];
    os << "<polyline fill=\"none\" stroke=\"" << hex[s % 8] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ser.x.size(); ++i)
      os << f.px(ser.x[i]) << ',' << f.py(ser.y[i]) << ' ';
    os << "\"/>\n";
  }

  int ly = f.top + 14;
  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const int lx = f.right - 150;
    os << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 20 << "\" y2=\""
       << ly - 4 << "\" stroke=\"" << hex[s % 8] << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << lx + 26 << "\" y=\"" << ly << "\" font-size=\"11\">"
       << spec.series[s].label << "</text>\n";
    ly += 16;
  }

  os << "</svg>\n";
  if (!os) throw std::runtime_error("write_plot_svg: write failure on " + path);
}

}  // namespace rsdf

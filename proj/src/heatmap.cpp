#include "cavity/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "cavity/params.hpp"
#include "cavity/tabular.hpp"

namespace cavity::io {

const char* to_string(MapChannel c) {
  switch (c) {
    case MapChannel::t_norm: return "t_norm";
    case MapChannel::f_norm: return "f_norm";
    case MapChannel::root_count: return "root_count";
  }
  return "?";
}

namespace {

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
};

Rgb colormap(double t) {
  static const double anchor[5][3] = {{0.267, 0.005, 0.329},
                                      {0.229, 0.322, 0.545},
                                      {0.127, 0.566, 0.551},
                                      {0.369, 0.788, 0.382},
                                      {0.993, 0.906, 0.144}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int seg = std::min(3, int(t));
  const double f = t - seg;
  Rgb c;
  c.r = uint8_t(255.0 * (anchor[seg][0] + f * (anchor[seg + 1][0] - anchor[seg][0])));
  c.g = uint8_t(255.0 * (anchor[seg][1] + f * (anchor[seg + 1][1] - anchor[seg][1])));
  c.b = uint8_t(255.0 * (anchor[seg][2] + f * (anchor[seg + 1][2] - anchor[seg][2])));
  return c;
}

// 5x7 glyphs, rows top to bottom, bit 4 = leftmost column.
const std::map<char, std::array<uint8_t, 7>>& font() {
  static const std::map<char, std::array<uint8_t, 7>> f = {
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
      {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
      {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
      {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
      {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
      {'[', {0x0E, 0x08, 0x08, 0x08, 0x08, 0x08, 0x0E}},
      {']', {0x0E, 0x02, 0x02, 0x02, 0x02, 0x02, 0x0E}},
      {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
      {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
      {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
      {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
      {'a', {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F}},
      {'b', {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x1E}},
      {'c', {0x00, 0x00, 0x0F, 0x10, 0x10, 0x10, 0x0F}},
      {'d', {0x01, 0x01, 0x0F, 0x11, 0x11, 0x11, 0x0F}},
      {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
      {'f', {0x06, 0x09, 0x08, 0x1E, 0x08, 0x08, 0x08}},
      {'g', {0x00, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
      {'h', {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x11}},
      {'i', {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E}},
      {'l', {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'m', {0x00, 0x00, 0x1A, 0x15, 0x15, 0x15, 0x15}},
      {'n', {0x00, 0x00, 0x1E, 0x11, 0x11, 0x11, 0x11}},
      {'o', {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E}},
      {'p', {0x00, 0x00, 0x1E, 0x11, 0x1E, 0x10, 0x10}},
      {'r', {0x00, 0x00, 0x17, 0x18, 0x10, 0x10, 0x10}},
      {'s', {0x00, 0x00, 0x0F, 0x10, 0x0E, 0x01, 0x1E}},
      {'t', {0x08, 0x08, 0x1E, 0x08, 0x08, 0x09, 0x06}},
      {'u', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D}},
      {'x', {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
      {'z', {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F}},
      {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
  };
  return f;
}

struct Canvas {
  int w = 0, h = 0;
  std::vector<uint8_t> px;  // rgb, row 0 = top

  Canvas(int width, int height) : w(width), h(height), px(std::size_t(width) * height * 3, 255) {}

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    const std::size_t i = (std::size_t(y) * w + x) * 3;
    px[i] = c.r;
    px[i + 1] = c.g;
    px[i + 2] = c.b;
  }

  void fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) set(x, y, c);
  }

  void text(int x, int y, const std::string& str, Rgb c) {
    const auto& f = font();
    for (char ch : str) {
      auto it = f.find(ch);
      if (it != f.end()) {
        for (int row = 0; row < 7; ++row)
          for (int col = 0; col < 5; ++col)
            if (it->second[row] & (1 << (4 - col))) set(x + col, y + row, c);
      }
      x += 6;
    }
  }
};

void write_bmp(const std::filesystem::path& path, const Canvas& c) {
  const int row_bytes = (c.w * 3 + 3) & ~3;
  const uint32_t pixel_bytes = uint32_t(row_bytes) * c.h;
  const uint32_t file_size = 54 + pixel_bytes;

  std::string out;
  out.reserve(file_size);
  const auto put16 = [&](uint16_t v) {
    out.push_back(char(v & 0xFF));
    out.push_back(char(v >> 8));
  };
  const auto put32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
  };
  out += "BM";
  put32(file_size);
  put32(0);
  put32(54);
  put32(40);
  put32(uint32_t(c.w));
  put32(uint32_t(c.h));
  put16(1);
  put16(24);
  put32(0);
  put32(pixel_bytes);
  put32(2835);
  put32(2835);
  put32(0);
  put32(0);
  std::vector<char> row(row_bytes, 0);
  for (int y = c.h - 1; y >= 0; --y) {  // BMP stores bottom-up
    for (int x = 0; x < c.w; ++x) {
      const std::size_t i = (std::size_t(y) * c.w + x) * 3;
      row[3 * x] = char(c.px[i + 2]);      // B
      row[3 * x + 1] = char(c.px[i + 1]);  // G
      row[3 * x + 2] = char(c.px[i]);      // R
    }
    out.append(row.data(), row.size());
  }
  write_text_atomic(path, out);
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

void render_heatmap(const SpectralMap& map, MapChannel channel, const std::filesystem::path& path,
                    bool overlay_dressed) {
  const std::size_t nc = map.nc(), np = map.np();
  if (nc == 0 || np == 0) throw std::invalid_argument("render_heatmap: empty map");

  std::vector<double> values(nc * np);
  for (std::size_t i = 0; i < nc * np; ++i) {
    switch (channel) {
      case MapChannel::t_norm: values[i] = map.t_norm[i]; break;
      case MapChannel::f_norm: values[i] = map.f_norm[i]; break;
      case MapChannel::root_count: values[i] = double(map.root_count[i]); break;
    }
  }
  const double vmin = *std::min_element(values.begin(), values.end());
  const double vmax = *std::max_element(values.begin(), values.end());
  const bool flat = !(vmax > vmin);

  const int scale = std::max(1, int(std::ceil(300.0 / double(std::max(nc, np)))));
  const int plot_w = int(nc) * scale;
  const int plot_h = int(np) * scale;
  const int left = 64, right = 110, top = 26, bottom = 42;
  Canvas canvas(left + plot_w + right, top + plot_h + bottom);
  const Rgb black{0, 0, 0};
  const Rgb white{255, 255, 255};

  for (std::size_t ic = 0; ic < nc; ++ic) {
    for (std::size_t ip = 0; ip < np; ++ip) {
      const double v = values[ic * np + ip];
      const double t = flat ? 0.5 : (v - vmin) / (vmax - vmin);
      const Rgb c = colormap(t);
      // delta_p increases upward
      const int x0 = left + int(ic) * scale;
      const int y0 = top + plot_h - int(ip + 1) * scale;
      canvas.fill_rect(x0, y0, x0 + scale, y0 + scale, c);
    }
  }

  if (overlay_dressed && map.meta.params.n_atoms > 0.0) {
    const double c_lo = map.delta_c_axis.front(), c_hi = map.delta_c_axis.back();
    const double p_lo = map.delta_p_axis.front(), p_hi = map.delta_p_axis.back();
    for (int x = 0; x < plot_w; ++x) {
      const double dc = c_lo + (c_hi - c_lo) * (double(x) + 0.5) / double(plot_w);
      const DressedCurve curve = dressed_resonances(dc, map.meta.params.n_atoms, map.meta.params.g0);
      for (double branch : {curve.upper, curve.lower}) {
        if (p_hi == p_lo) continue;
        const double fy = (branch - p_lo) / (p_hi - p_lo);
        if (fy < 0.0 || fy > 1.0) continue;
        const int y = top + plot_h - 1 - int(fy * (plot_h - 1));
        canvas.set(left + x, y, white);
        canvas.set(left + x, y + 1, white);
      }
    }
  }

  // Colour bar with stated scale.
  const int bar_x = left + plot_w + 18;
  for (int y = 0; y < plot_h; ++y) {
    const double t = 1.0 - double(y) / std::max(1, plot_h - 1);
    const Rgb c = colormap(flat ? 0.5 : t);
    for (int x = 0; x < 12; ++x) canvas.set(bar_x + x, top + y, c);
  }
  canvas.text(bar_x + 16, top, "max=" + short_number(vmax), black);
  canvas.text(bar_x + 16, top + plot_h - 7, "min=" + short_number(vmin), black);
  if (flat) canvas.text(bar_x + 16, top + plot_h / 2, "(flat)", black);

  canvas.text(left, 8, std::string(to_string(channel)), black);

  // Axes in MHz.
  const auto mhz = [](double rad) { return short_number(rad / (two_pi * 1e6)); };
  canvas.text(left, top + plot_h + 6, mhz(map.delta_c_axis.front()), black);
  const std::string cmax = mhz(map.delta_c_axis.back());
  canvas.text(left + plot_w - int(cmax.size()) * 6, top + plot_h + 6, cmax, black);
  canvas.text(left + plot_w / 2 - 24, top + plot_h + 20, "dc [MHz]", black);
  canvas.text(2, top + plot_h - 7, mhz(map.delta_p_axis.front()), black);
  canvas.text(2, top, mhz(map.delta_p_axis.back()), black);
  canvas.text(2, top + plot_h / 2, "dp", black);

  write_bmp(path, canvas);
}

}  // namespace cavity::io

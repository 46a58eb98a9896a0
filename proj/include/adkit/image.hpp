#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "adkit/color.hpp"
#include "adkit/error.hpp"
#include "adkit/geometry.hpp"

namespace adkit {

// Interleaved 8-bit RGBA raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgba;

  static Image solid(int w, int h, Color c, std::uint8_t alpha = 255) {
    Image img;
    img.width = w;
    img.height = h;
    img.rgba.resize(static_cast<std::size_t>(w) * h * 4);
    for (std::size_t i = 0; i < img.rgba.size(); i += 4) {
      img.rgba[i] = static_cast<std::uint8_t>(c.r);
      img.rgba[i + 1] = static_cast<std::uint8_t>(c.g);
      img.rgba[i + 2] = static_cast<std::uint8_t>(c.b);
      img.rgba[i + 3] = alpha;
    }
    return img;
  }

  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width + x) * 4;
  }

  Color pixel(int x, int y) const {
    const std::size_t i = index(x, y);
    return {rgba[i], rgba[i + 1], rgba[i + 2]};
  }
  std::uint8_t alpha(int x, int y) const { return rgba[index(x, y) + 3]; }

  void set_pixel(int x, int y, Color c, std::uint8_t a = 255) {
    const std::size_t i = index(x, y);
    rgba[i] = static_cast<std::uint8_t>(c.r);
    rgba[i + 1] = static_cast<std::uint8_t>(c.g);
    rgba[i + 2] = static_cast<std::uint8_t>(c.b);
    rgba[i + 3] = a;
  }

  bool operator==(const Image&) const = default;
};

// Binary pixel grid, 1 = inside the region.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  bool empty() const { return width <= 0 || height <= 0; }
  std::uint8_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint8_t v : data) n += v != 0;
    return n;
  }
};

// Grayscale masks use the convention: value >= threshold is foreground.
// Expanded grayscale PNGs carry the gray level in every channel, so the red
// channel is representative.
inline Mask image_to_mask(const Image& img, std::uint8_t threshold = 128) {
  Mask m;
  m.width = img.width;
  m.height = img.height;
  m.data.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      m.data[static_cast<std::size_t>(y) * img.width + x] =
          img.rgba[img.index(x, y)] >= threshold ? 1 : 0;
  return m;
}

inline Mask alpha_to_mask(const Image& img, std::uint8_t threshold = 128) {
  Mask m;
  m.width = img.width;
  m.height = img.height;
  m.data.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      m.data[static_cast<std::size_t>(y) * img.width + x] =
          img.alpha(x, y) >= threshold ? 1 : 0;
  return m;
}

// Tight bounds of the nonzero mask pixels; empty rect when the mask is blank.
inline Rect mask_bounds(const Mask& m) {
  int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return {};
  return {static_cast<double>(x0), static_cast<double>(y0),
          static_cast<double>(x1 + 1), static_cast<double>(y1 + 1)};
}

// Pixel-index span of a normalized interval [v0,v1) mapped onto n pixels
// with pixel-center sampling: pixel i is inside iff v0 <= (i+0.5)/n < v1.
struct PixelSpan {
  int begin = 0;
  int end = 0;  // half-open
  bool empty() const { return end <= begin; }
};

inline PixelSpan pixel_span(double v0, double v1, int n) {
  if (v1 <= v0) return {};
  int begin = static_cast<int>(std::ceil(v0 * n - 0.5));
  int end = static_cast<int>(std::ceil(v1 * n - 0.5));
  begin = std::clamp(begin, 0, n);
  end = std::clamp(end, 0, n);
  return {begin, end};
}

// Maps a normalized rect to the pixel rectangle covering the pixel centers
// inside it.
struct PixelRect {
  PixelSpan xs;
  PixelSpan ys;
  bool empty() const { return xs.empty() || ys.empty(); }
};

inline PixelRect pixel_rect(const Rect& r, int width, int height) {
  return {pixel_span(r.x0, r.x1, width), pixel_span(r.y0, r.y1, height)};
}

// Bilinear resize. Deterministic; used for pasting foregrounds and logos.
inline Image resize_bilinear(const Image& src, int out_w, int out_h) {
  if (src.empty() || out_w <= 0 || out_h <= 0)
    throw InvalidGeometry("resize_bilinear: empty source or target");
  Image out;
  out.width = out_w;
  out.height = out_h;
  out.rgba.resize(static_cast<std::size_t>(out_w) * out_h * 4);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, src.height - 1);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = std::clamp(fy - y0, 0.0, 1.0);
    for (int x = 0; x < out_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, src.width - 1);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = std::clamp(fx - x0, 0.0, 1.0);
      for (int c = 0; c < 4; ++c) {
        const double v00 = src.rgba[src.index(x0, y0) + c];
        const double v10 = src.rgba[src.index(x1, y0) + c];
        const double v01 = src.rgba[src.index(x0, y1) + c];
        const double v11 = src.rgba[src.index(x1, y1) + c];
        const double v = (1 - wy) * ((1 - wx) * v00 + wx * v10) +
                         wy * ((1 - wx) * v01 + wx * v11);
        out.rgba[out.index(x, y) + c] =
            static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return out;
}

// Source-over composite of `src` onto `dst` with its top-left corner at
// (ox, oy). Pixels outside dst are dropped.
inline void composite_over(Image& dst, const Image& src, int ox, int oy) {
  for (int y = 0; y < src.height; ++y) {
    const int ty = oy + y;
    if (ty < 0 || ty >= dst.height) continue;
    for (int x = 0; x < src.width; ++x) {
      const int tx = ox + x;
      if (tx < 0 || tx >= dst.width) continue;
      const std::size_t si = src.index(x, y);
      const std::size_t di = dst.index(tx, ty);
      const int a = src.rgba[si + 3];
      if (a == 0) continue;
      if (a == 255) {
        dst.rgba[di] = src.rgba[si];
        dst.rgba[di + 1] = src.rgba[si + 1];
        dst.rgba[di + 2] = src.rgba[si + 2];
        dst.rgba[di + 3] = 255;
        continue;
      }
      for (int c = 0; c < 3; ++c) {
        const int s = src.rgba[si + c];
        const int d = dst.rgba[di + c];
        dst.rgba[di + c] =
            static_cast<std::uint8_t>((s * a + d * (255 - a) + 127) / 255);
      }
      dst.rgba[di + 3] = static_cast<std::uint8_t>(
          a + (dst.rgba[di + 3] * (255 - a) + 127) / 255);
    }
  }
}

}  // namespace adkit

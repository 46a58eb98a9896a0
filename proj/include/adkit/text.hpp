#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "adkit/color.hpp"
#include "adkit/error.hpp"
#include "adkit/geometry.hpp"
#include "adkit/image.hpp"

namespace adkit {

// Metric table of a fixed-advance font: every codepoint advances by
// `advance_em` and lines are `line_height_em` tall, both in units of the
// font size. Rendering uses the built-in 5x7 bitmap; the metrics alone
// drive the fitting math, so tests can supply synthetic tables.
struct FontMetrics {
  std::string id = "builtin-5x7";
  double advance_em = 0.75;
  double line_height_em = 1.25;
};

// ---------------------------------------------------------------------------
// UTF-8
// ---------------------------------------------------------------------------

inline std::vector<std::uint32_t> utf8_codepoints(std::string_view s) {
  std::vector<std::uint32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = 0;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c >> 4) == 0xE) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c >> 3) == 0x1E) {
      cp = c & 0x07;
      len = 4;
    } else {
      cp = 0xFFFD;  // stray continuation byte
    }
    for (std::size_t k = 1; k < len; ++k) {
      if (i + k >= s.size() ||
          (static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) {
        cp = 0xFFFD;
        len = k;
        break;
      }
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in 5x7 glyphs (classic GLCD table, ASCII 32..126; column bytes,
// LSB = top row). Codepoints outside the table render as a filled block.
// ---------------------------------------------------------------------------

namespace fontdata {

inline constexpr std::array<std::array<std::uint8_t, 5>, 95> kGlyphs5x7 = {{
    {0x00, 0x00, 0x00, 0x00, 0x00}, {0x00, 0x00, 0x5F, 0x00, 0x00},
    {0x00, 0x07, 0x00, 0x07, 0x00}, {0x14, 0x7F, 0x14, 0x7F, 0x14},
    {0x24, 0x2A, 0x7F, 0x2A, 0x12}, {0x23, 0x13, 0x08, 0x64, 0x62},
    {0x36, 0x49, 0x55, 0x22, 0x50}, {0x00, 0x05, 0x03, 0x00, 0x00},
    {0x00, 0x1C, 0x22, 0x41, 0x00}, {0x00, 0x41, 0x22, 0x1C, 0x00},
    {0x08, 0x2A, 0x1C, 0x2A, 0x08}, {0x08, 0x08, 0x3E, 0x08, 0x08},
    {0x00, 0x50, 0x30, 0x00, 0x00}, {0x08, 0x08, 0x08, 0x08, 0x08},
    {0x00, 0x60, 0x60, 0x00, 0x00}, {0x20, 0x10, 0x08, 0x04, 0x02},
    {0x3E, 0x51, 0x49, 0x45, 0x3E}, {0x00, 0x42, 0x7F, 0x40, 0x00},
    {0x42, 0x61, 0x51, 0x49, 0x46}, {0x21, 0x41, 0x45, 0x4B, 0x31},
    {0x18, 0x14, 0x12, 0x7F, 0x10}, {0x27, 0x45, 0x45, 0x45, 0x39},
    {0x3C, 0x4A, 0x49, 0x49, 0x30}, {0x01, 0x71, 0x09, 0x05, 0x03},
    {0x36, 0x49, 0x49, 0x49, 0x36}, {0x06, 0x49, 0x49, 0x29, 0x1E},
    {0x00, 0x36, 0x36, 0x00, 0x00}, {0x00, 0x56, 0x36, 0x00, 0x00},
    {0x00, 0x08, 0x14, 0x22, 0x41}, {0x14, 0x14, 0x14, 0x14, 0x14},
    {0x41, 0x22, 0x14, 0x08, 0x00}, {0x02, 0x01, 0x51, 0x09, 0x06},
    {0x32, 0x49, 0x79, 0x41, 0x3E}, {0x7E, 0x11, 0x11, 0x11, 0x7E},
    {0x7F, 0x49, 0x49, 0x49, 0x36}, {0x3E, 0x41, 0x41, 0x41, 0x22},
    {0x7F, 0x41, 0x41, 0x22, 0x1C}, {0x7F, 0x49, 0x49, 0x49, 0x41},
    {0x7F, 0x09, 0x09, 0x01, 0x01}, {0x3E, 0x41, 0x41, 0x51, 0x32},
    {0x7F, 0x08, 0x08, 0x08, 0x7F}, {0x00, 0x41, 0x7F, 0x41, 0x00},
    {0x20, 0x40, 0x41, 0x3F, 0x01}, {0x7F, 0x08, 0x14, 0x22, 0x41},
    {0x7F, 0x40, 0x40, 0x40, 0x40}, {0x7F, 0x02, 0x04, 0x02, 0x7F},
    {0x7F, 0x04, 0x08, 0x10, 0x7F}, {0x3E, 0x41, 0x41, 0x41, 0x3E},
    {0x7F, 0x09, 0x09, 0x09, 0x06}, {0x3E, 0x41, 0x51, 0x21, 0x5E},
    {0x7F, 0x09, 0x19, 0x29, 0x46}, {0x46, 0x49, 0x49, 0x49, 0x31},
    {0x01, 0x01, 0x7F, 0x01, 0x01}, {0x3F, 0x40, 0x40, 0x40, 0x3F},
    {0x1F, 0x20, 0x40, 0x20, 0x1F}, {0x7F, 0x20, 0x18, 0x20, 0x7F},
    {0x63, 0x14, 0x08, 0x14, 0x63}, {0x03, 0x04, 0x78, 0x04, 0x03},
    {0x61, 0x51, 0x49, 0x45, 0x43}, {0x00, 0x00, 0x7F, 0x41, 0x41},
    {0x02, 0x04, 0x08, 0x10, 0x20}, {0x41, 0x41, 0x7F, 0x00, 0x00},
    {0x04, 0x02, 0x01, 0x02, 0x04}, {0x40, 0x40, 0x40, 0x40, 0x40},
    {0x00, 0x01, 0x02, 0x04, 0x00}, {0x20, 0x54, 0x54, 0x54, 0x78},
    {0x7F, 0x48, 0x44, 0x44, 0x38}, {0x38, 0x44, 0x44, 0x44, 0x20},
    {0x38, 0x44, 0x44, 0x48, 0x7F}, {0x38, 0x54, 0x54, 0x54, 0x18},
    {0x08, 0x7E, 0x09, 0x01, 0x02}, {0x08, 0x14, 0x54, 0x54, 0x3C},
    {0x7F, 0x08, 0x04, 0x04, 0x78}, {0x00, 0x44, 0x7D, 0x40, 0x00},
    {0x20, 0x40, 0x44, 0x3D, 0x00}, {0x00, 0x7F, 0x10, 0x28, 0x44},
    {0x00, 0x41, 0x7F, 0x40, 0x00}, {0x7C, 0x04, 0x18, 0x04, 0x78},
    {0x7C, 0x08, 0x04, 0x04, 0x78}, {0x38, 0x44, 0x44, 0x44, 0x38},
    {0x7C, 0x14, 0x14, 0x14, 0x08}, {0x08, 0x14, 0x14, 0x18, 0x7C},
    {0x7C, 0x08, 0x04, 0x04, 0x08}, {0x48, 0x54, 0x54, 0x54, 0x20},
    {0x04, 0x3F, 0x44, 0x40, 0x20}, {0x3C, 0x40, 0x40, 0x20, 0x7C},
    {0x1C, 0x20, 0x40, 0x20, 0x1C}, {0x3C, 0x40, 0x30, 0x40, 0x3C},
    {0x44, 0x28, 0x10, 0x28, 0x44}, {0x0C, 0x50, 0x50, 0x50, 0x3C},
    {0x44, 0x64, 0x54, 0x4C, 0x44}, {0x00, 0x08, 0x36, 0x41, 0x00},
    {0x00, 0x00, 0x7F, 0x00, 0x00}, {0x00, 0x41, 0x36, 0x08, 0x00},
    {0x08, 0x08, 0x2A, 0x1C, 0x08},
}};

inline const std::array<std::uint8_t, 5>& glyph(std::uint32_t cp) {
  static constexpr std::array<std::uint8_t, 5> block{0x7F, 0x7F, 0x7F, 0x7F,
                                                     0x7F};
  if (cp >= 32 && cp <= 126) return kGlyphs5x7[cp - 32];
  return block;
}

}  // namespace fontdata

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

struct TextFit {
  double size_px = 0.0;
  std::vector<std::string> lines;
  bool overflow = false;
};

namespace detail {

inline std::vector<std::pair<std::string, std::size_t>> split_words(
    std::string_view content) {
  std::vector<std::pair<std::string, std::size_t>> words;  // text, codepoints
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t sp = content.find(' ', pos);
    const std::string_view word =
        content.substr(pos, sp == std::string_view::npos ? sp : sp - pos);
    if (!word.empty())
      words.emplace_back(std::string(word), utf8_codepoints(word).size());
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
  }
  return words;
}

// Greedy wrap at a fixed size; returns false when a single word cannot fit
// the available width.
inline bool wrap_words(
    const std::vector<std::pair<std::string, std::size_t>>& words,
    double advance_px, double avail_w, std::vector<std::string>* lines_out) {
  std::vector<std::string> lines;
  std::string line;
  std::size_t line_cps = 0;
  for (const auto& [word, cps] : words) {
    if (cps * advance_px > avail_w && avail_w >= 0) {
      // A lone word wider than the box: wrapping cannot help.
      if (line_cps > 0) lines.push_back(line);
      return false;
    }
    const std::size_t joined = line_cps == 0 ? cps : line_cps + 1 + cps;
    if (line_cps > 0 && joined * advance_px > avail_w) {
      lines.push_back(line);
      line = word;
      line_cps = cps;
    } else {
      if (line_cps > 0) line += ' ';
      line += word;
      line_cps = joined;
    }
  }
  if (line_cps > 0) lines.push_back(line);
  if (lines_out) *lines_out = std::move(lines);
  return true;
}

}  // namespace detail

// Largest font size whose greedy space-wrap fits the box with a 5% inset on
// each side; single lines win automatically because wrapping only happens
// when the width forces it. Below `min_size_px` the text is set at the
// minimum anyway, flagged as overflow, and later clipped by the renderer.
inline TextFit fit_text(const std::string& content, const Rect& box_px,
                        const FontMetrics& font, double min_size_px,
                        Warnings* warnings = nullptr) {
  if (content.empty()) throw InvalidInput("fit_text: empty content");
  if (min_size_px <= 0.0) throw InvalidInput("fit_text: min size must be > 0");
  const auto words = detail::split_words(content);
  TextFit fit;
  if (words.empty()) throw InvalidInput("fit_text: content is all spaces");

  const double avail_w = 0.9 * box_px.width();
  const double avail_h = 0.9 * box_px.height();

  auto feasible = [&](double s, std::vector<std::string>* lines) {
    if (s <= 0.0) return false;
    std::vector<std::string> tmp;
    if (!detail::wrap_words(words, font.advance_em * s, avail_w, &tmp))
      return false;
    if (static_cast<double>(tmp.size()) * font.line_height_em * s > avail_h)
      return false;
    if (lines) *lines = std::move(tmp);
    return true;
  };

  double hi = std::max(avail_h / font.line_height_em, 0.0);
  if (hi > 0.0 && feasible(hi, &fit.lines)) {
    fit.size_px = hi;
    return fit;
  }
  double lo = 0.0;
  for (int iter = 0; iter < 64; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid, nullptr)) lo = mid;
    else hi = mid;
  }

  if (lo >= min_size_px && feasible(lo, &fit.lines)) {
    fit.size_px = lo;
    return fit;
  }

  // Overflow path: set at the minimum size and let the renderer clip.
  fit.size_px = min_size_px;
  fit.overflow = true;
  if (!detail::wrap_words(words, font.advance_em * min_size_px,
                          std::max(avail_w, 0.0), &fit.lines) ||
      fit.lines.empty()) {
    fit.lines.clear();
    for (const auto& [word, cps] : words) fit.lines.push_back(word);
  }
  warn(warnings, "fit_text: box too small for \"" + content +
                     "\"; rendering at minimum size with clipping");
  return fit;
}

// ---------------------------------------------------------------------------
// Drawing
// ---------------------------------------------------------------------------

// Draws the fitted lines centered in `box_px`, clipped to the box. Glyphs
// are the 5x7 bitmap scaled on an 8-unit em grid.
inline void draw_text(Image& img, const TextFit& fit, const Rect& box_px,
                      const FontMetrics& font, Color color) {
  if (fit.lines.empty() || fit.size_px <= 0.0) return;
  const double s = fit.size_px;
  const double unit = s / 8.0;
  const double advance = font.advance_em * s;
  const double line_h = font.line_height_em * s;

  Rect clip = intersect(box_px, {0.0, 0.0, static_cast<double>(img.width),
                                 static_cast<double>(img.height)});
  if (clip.empty()) return;

  const double block_h = static_cast<double>(fit.lines.size()) * line_h;
  double ty = box_px.y0 + 0.5 * (box_px.height() - block_h);
  for (const std::string& line : fit.lines) {
    const auto cps = utf8_codepoints(line);
    const double line_w = static_cast<double>(cps.size()) * advance;
    double tx = box_px.x0 + 0.5 * (box_px.width() - line_w);
    const double glyph_top = ty + 0.5 * (line_h - 7.0 * unit);
    for (std::uint32_t cp : cps) {
      if (cp != ' ') {
        const auto& g = fontdata::glyph(cp);
        for (int col = 0; col < 5; ++col)
          for (int row = 0; row < 7; ++row) {
            if (!((g[col] >> row) & 1)) continue;
            const Rect cell{tx + col * unit, glyph_top + row * unit,
                            tx + (col + 1) * unit, glyph_top + (row + 1) * unit};
            const Rect r = intersect(cell, clip);
            if (r.empty()) continue;
            const int x0 = static_cast<int>(std::floor(r.x0));
            const int x1 = static_cast<int>(std::ceil(r.x1));
            const int y0 = static_cast<int>(std::floor(r.y0));
            const int y1 = static_cast<int>(std::ceil(r.y1));
            for (int y = y0; y < y1; ++y) {
              if (y < 0 || y >= img.height) continue;
              const double cy = y + 0.5;
              if (cy < r.y0 || cy >= r.y1) continue;
              for (int x = x0; x < x1; ++x) {
                if (x < 0 || x >= img.width) continue;
                const double cx = x + 0.5;
                if (cx < r.x0 || cx >= r.x1) continue;
                img.set_pixel(x, y, color);
              }
            }
          }
      }
      tx += advance;
    }
    ty += line_h;
  }
}

}  // namespace adkit

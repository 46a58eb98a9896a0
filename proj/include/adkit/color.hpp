#pragma once

#include <algorithm>
#include <cmath>

#include "adkit/error.hpp"

namespace adkit {

struct Color {
  int r = 0;
  int g = 0;
  int b = 0;

  bool operator==(const Color&) const = default;
};

inline Color clamp_color(int r, int g, int b) {
  return {std::clamp(r, 0, 255), std::clamp(g, 0, 255), std::clamp(b, 0, 255)};
}

// WCAG relative luminance of an sRGB color.
inline double relative_luminance(const Color& c) {
  auto linearize = [](int channel) {
    const double v = channel / 255.0;
    return v <= 0.03928 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
  };
  return 0.2126 * linearize(c.r) + 0.7152 * linearize(c.g) +
         0.0722 * linearize(c.b);
}

// WCAG contrast ratio, (L_max + 0.05) / (L_min + 0.05), in [1, 21].
inline double contrast_ratio(const Color& a, const Color& b) {
  double la = relative_luminance(a);
  double lb = relative_luminance(b);
  if (la < lb) std::swap(la, lb);
  return (la + 0.05) / (lb + 0.05);
}

// Contrast ratio rescaled to [0, 1] for score mixing.
inline double normalized_contrast(const Color& a, const Color& b) {
  return (contrast_ratio(a, b) - 1.0) / 20.0;
}

inline double color_distance(const Color& a, const Color& b) {
  const double dr = a.r - b.r;
  const double dg = a.g - b.g;
  const double db = a.b - b.b;
  return std::sqrt(dr * dr + dg * dg + db * db);
}

// Euclidean RGB distance rescaled to [0, 1].
inline double normalized_color_distance(const Color& a, const Color& b) {
  return color_distance(a, b) / (255.0 * std::sqrt(3.0));
}

inline double color_similarity(const Color& a, const Color& b) {
  return 1.0 - normalized_color_distance(a, b);
}

}  // namespace adkit

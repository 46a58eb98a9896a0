#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace adkit {

// Axis-aligned rectangle in edge coordinates. Normalized canvas space is
// [0,1] x [0,1] with y growing downwards, matching raster order.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return empty() ? 0.0 : width() * height(); }
  bool empty() const { return x1 <= x0 || y1 <= y0; }

  bool contains(const Rect& other) const {
    return x0 <= other.x0 && y0 <= other.y0 && x1 >= other.x1 && y1 >= other.y1;
  }
};

inline Rect intersect(const Rect& a, const Rect& b) {
  return {std::max(a.x0, b.x0), std::max(a.y0, b.y0),
          std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
}

inline double intersection_area(const Rect& a, const Rect& b) {
  return intersect(a, b).area();
}

inline Rect unit_rect() { return {0.0, 0.0, 1.0, 1.0}; }

inline Rect clip_to_unit(const Rect& r) { return intersect(r, unit_rect()); }

// Intersection over union of two rectangles; 0 when both are empty.
inline double iou(const Rect& a, const Rect& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

// Exact area of the union of rectangles by coordinate-compression sweep:
// sort the distinct x edges, and for every vertical slab merge the y
// intervals of the rectangles that span it.
inline double union_area(const std::vector<Rect>& rects) {
  std::vector<const Rect*> live;
  live.reserve(rects.size());
  std::vector<double> xs;
  xs.reserve(rects.size() * 2);
  for (const Rect& r : rects) {
    if (r.empty()) continue;
    live.push_back(&r);
    xs.push_back(r.x0);
    xs.push_back(r.x1);
  }
  if (live.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double total = 0.0;
  std::vector<std::pair<double, double>> spans;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double slab_w = xs[i + 1] - xs[i];
    if (slab_w <= 0.0) continue;
    const double mid = 0.5 * (xs[i] + xs[i + 1]);
    spans.clear();
    for (const Rect* r : live)
      if (r->x0 <= mid && mid < r->x1) spans.emplace_back(r->y0, r->y1);
    if (spans.empty()) continue;
    std::sort(spans.begin(), spans.end());
    double covered = 0.0;
    double cur_lo = spans.front().first;
    double cur_hi = spans.front().second;
    for (std::size_t k = 1; k < spans.size(); ++k) {
      if (spans[k].first > cur_hi) {
        covered += cur_hi - cur_lo;
        cur_lo = spans[k].first;
        cur_hi = spans[k].second;
      } else {
        cur_hi = std::max(cur_hi, spans[k].second);
      }
    }
    covered += cur_hi - cur_lo;
    total += covered * slab_w;
  }
  return total;
}

}  // namespace adkit

#pragma once

// Pixel-sampling cross-check for the exact geometry kernel. Everything here
// recomputes coverage by brute force on an n x n grid with pixel-center
// sampling and shares no code with the sweep implementation, so the two
// routes can validate each other.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "adkit/geometry.hpp"
#include "adkit/image.hpp"
#include "adkit/layout.hpp"
#include "adkit/metrics.hpp"

namespace adkit::oracle {

constexpr int kDefaultGrid = 2000;

namespace detail {

struct Span {
  int begin = 0;
  int end = 0;
};

// Pixel i covered iff v0 <= (i + 0.5) / n < v1.
inline Span span(double v0, double v1, int n) {
  int b = static_cast<int>(std::ceil(v0 * n - 0.5));
  int e = static_cast<int>(std::ceil(v1 * n - 0.5));
  return {std::clamp(b, 0, n), std::clamp(e, 0, n)};
}

struct GridRect {
  Span xs, ys;
};

inline std::vector<GridRect> grid_rects(const std::vector<Rect>& rects, int n) {
  std::vector<GridRect> out;
  out.reserve(rects.size());
  for (const Rect& r : rects)
    out.push_back({span(r.x0, r.x1, n), span(r.y0, r.y1, n)});
  return out;
}

}  // namespace detail

// One rasterized pass over the grid; returns pixel counts for the union of
// `rects` and, when `subject` is non-null, its interaction with the subject
// rectangle.
struct Counts {
  std::uint64_t cover = 0;
  std::uint64_t subject = 0;
  std::uint64_t cover_and_subject = 0;
  std::uint64_t total = 0;
};

inline Counts rasterize(const std::vector<Rect>& rects, const Rect* subject,
                        int n = kDefaultGrid) {
  Counts c;
  c.total = static_cast<std::uint64_t>(n) * n;
  const auto grects = detail::grid_rects(rects, n);
  detail::GridRect sub{};
  if (subject) sub = {detail::span(subject->x0, subject->x1, n),
                      detail::span(subject->y0, subject->y1, n)};
  std::vector<std::uint8_t> row(static_cast<std::size_t>(n));
  for (int y = 0; y < n; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (const auto& g : grects) {
      if (y < g.ys.begin || y >= g.ys.end || g.xs.end <= g.xs.begin) continue;
      std::fill(row.begin() + g.xs.begin, row.begin() + g.xs.end, 1);
    }
    std::uint64_t row_cover = 0;
    for (int x = 0; x < n; ++x) row_cover += row[x];
    c.cover += row_cover;
    if (subject && y >= sub.ys.begin && y < sub.ys.end) {
      c.subject += static_cast<std::uint64_t>(sub.xs.end - sub.xs.begin);
      for (int x = sub.xs.begin; x < sub.xs.end; ++x)
        c.cover_and_subject += row[x];
    }
  }
  return c;
}

inline double union_area(const std::vector<BBox>& boxes, int n = kDefaultGrid) {
  std::vector<Rect> rects;
  rects.reserve(boxes.size());
  for (const BBox& b : boxes) rects.push_back(b.clipped());
  const Counts c = rasterize(rects, nullptr, n);
  return static_cast<double>(c.cover) / static_cast<double>(c.total);
}

inline double pair_iou(const BBox& a, const BBox& b, int n = kDefaultGrid) {
  const auto sa = detail::grid_rects({a.clipped()}, n)[0];
  const auto sb = detail::grid_rects({b.clipped()}, n)[0];
  std::uint64_t inter = 0, uni = 0;
  for (int y = 0; y < n; ++y) {
    const bool ya = y >= sa.ys.begin && y < sa.ys.end;
    const bool yb = y >= sb.ys.begin && y < sb.ys.end;
    if (!ya && !yb) continue;
    for (int x = 0; x < n; ++x) {
      const bool in_a = ya && x >= sa.xs.begin && x < sa.xs.end;
      const bool in_b = yb && x >= sb.xs.begin && x < sb.xs.end;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

inline double overlap(const Layout& l, int n = kDefaultGrid) {
  std::vector<BBox> boxes;
  for (const Element& e : l.graphic)
    if (element_valid(e) && e.kind != ElementKind::Underlay)
      boxes.push_back(e.bbox);
  if (boxes.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      sum += pair_iou(boxes[i], boxes[j], n);
      ++pairs;
    }
  return sum / static_cast<double>(pairs);
}

inline double utility(const Layout& l, const BBox& subject_bbox,
                      int n = kDefaultGrid) {
  const auto elems = valid_graphic(l);
  std::vector<Rect> rects;
  for (const Element* e : elems) rects.push_back(e->bbox.clipped());
  const Rect s = subject_bbox.clipped();
  const Counts c = rasterize(rects, &s, n);
  const std::uint64_t denom = c.total - c.subject;
  if (denom == 0) return 0.0;
  return static_cast<double>(c.cover - c.cover_and_subject) /
         static_cast<double>(denom);
}

inline double occlusion(const Layout& l, const BBox& subject_bbox,
                        int n = kDefaultGrid) {
  const auto elems = valid_graphic(l);
  if (elems.empty()) return 0.0;
  std::vector<Rect> rects;
  for (const Element* e : elems) rects.push_back(e->bbox.clipped());
  const Rect s = subject_bbox.clipped();
  const Counts c = rasterize(rects, &s, n);
  if (c.cover == 0) return 0.0;
  return static_cast<double>(c.cover_and_subject) /
         static_cast<double>(c.cover);
}

// Mask-based occlusion on the mask's own grid; matches the production
// kernel's sampling convention exactly when the mask is square.
inline double occlusion_mask(const Layout& l, const Mask& mask) {
  const auto elems = valid_graphic(l);
  if (elems.empty()) return 0.0;
  std::uint64_t cover = 0, covered_subject = 0;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      const double cx = (x + 0.5) / mask.width;
      const double cy = (y + 0.5) / mask.height;
      bool inside = false;
      for (const Element* e : elems) {
        const Rect r = e->bbox.clipped();
        if (cx >= r.x0 && cx < r.x1 && cy >= r.y0 && cy < r.y1) {
          inside = true;
          break;
        }
      }
      if (inside) {
        ++cover;
        covered_subject += mask.at(x, y) != 0;
      }
    }
  return cover > 0
             ? static_cast<double>(covered_subject) / static_cast<double>(cover)
             : 0.0;
}

}  // namespace adkit::oracle

#pragma once

// Graphics rendering: tagline grouping, font/color selection scored by
// background contrast and foreground similarity, underlay shape/fill
// selection, and compositing onto the generated background.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "adkit/color.hpp"
#include "adkit/error.hpp"
#include "adkit/image.hpp"
#include "adkit/layout.hpp"
#include "adkit/shapes.hpp"
#include "adkit/text.hpp"

namespace adkit {

struct StyleConfig {
  double w_contrast = 0.7;
  double w_similarity = 0.3;
  double min_contrast = 1.5;   // fallback threshold for tagline colors
  double height_tol = 0.10;    // relative height difference within a group
  double center_tol = 0.02;    // x- or y-center distance within a group
  double min_font_px = 12.0;   // at a 1024-wide canvas, scaled by width
};

// ---------------------------------------------------------------------------
// Region sampling
// ---------------------------------------------------------------------------

// Channelwise mean over the pixel centers inside the clipped box.
inline Color region_mean_color(const Image& img, const BBox& box) {
  const PixelRect pr = pixel_rect(box.clipped(), img.width, img.height);
  if (pr.empty())
    throw InvalidGeometry("region_mean_color: box covers no pixels");
  std::uint64_t sum[3] = {0, 0, 0};
  std::uint64_t n = 0;
  for (int y = pr.ys.begin; y < pr.ys.end; ++y)
    for (int x = pr.xs.begin; x < pr.xs.end; ++x) {
      const std::size_t i = img.index(x, y);
      sum[0] += img.rgba[i];
      sum[1] += img.rgba[i + 1];
      sum[2] += img.rgba[i + 2];
      ++n;
    }
  return {static_cast<int>((sum[0] + n / 2) / n),
          static_cast<int>((sum[1] + n / 2) / n),
          static_cast<int>((sum[2] + n / 2) / n)};
}

namespace detail {

// Mean over the union of several boxes, counting shared pixels once.
inline Color region_mean_color_union(const Image& img,
                                     const std::vector<BBox>& boxes,
                                     bool* covered = nullptr) {
  std::vector<PixelRect> prs;
  int y_lo = img.height, y_hi = 0;
  for (const BBox& b : boxes) {
    const PixelRect pr = pixel_rect(b.clipped(), img.width, img.height);
    if (pr.empty()) continue;
    prs.push_back(pr);
    y_lo = std::min(y_lo, pr.ys.begin);
    y_hi = std::max(y_hi, pr.ys.end);
  }
  if (prs.empty()) {
    if (covered) *covered = false;
    return {0, 0, 0};
  }
  if (covered) *covered = true;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width));
  std::uint64_t sum[3] = {0, 0, 0};
  std::uint64_t n = 0;
  for (int y = y_lo; y < y_hi; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (const PixelRect& pr : prs)
      if (y >= pr.ys.begin && y < pr.ys.end)
        std::fill(row.begin() + pr.xs.begin, row.begin() + pr.xs.end, 1);
    for (int x = 0; x < img.width; ++x) {
      if (!row[x]) continue;
      const std::size_t i = img.index(x, y);
      sum[0] += img.rgba[i];
      sum[1] += img.rgba[i + 1];
      sum[2] += img.rgba[i + 2];
      ++n;
    }
  }
  return {static_cast<int>((sum[0] + n / 2) / n),
          static_cast<int>((sum[1] + n / 2) / n),
          static_cast<int>((sum[2] + n / 2) / n)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tagline grouping
// ---------------------------------------------------------------------------

struct TaglineGrouping {
  std::vector<int> group_of;                    // per tagline index
  std::vector<std::vector<std::size_t>> groups; // members per group id

  std::size_t group_count() const { return groups.size(); }
};

// Two taglines are directly linked when their heights differ by at most
// `height_tol` (relative to the larger) and either their x-centers or their
// y-centers are within `center_tol`. The grouping is the transitive
// closure; ids are numbered by first appearance in input order.
inline TaglineGrouping group_taglines(const std::vector<Element>& taglines,
                                      const StyleConfig& cfg = {}) {
  const std::size_t n = taglines.size();
  for (const Element& t : taglines)
    if (t.kind != ElementKind::Tagline)
      throw InvalidInput("group_taglines: all elements must be taglines");

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto linked = [&](const BBox& a, const BBox& b) {
    const double hmax = std::max(a.h, b.h);
    if (hmax <= 0.0) return true;
    if (std::abs(a.h - b.h) / hmax > cfg.height_tol) return false;
    return std::abs(a.x - b.x) <= cfg.center_tol ||
           std::abs(a.y - b.y) <= cfg.center_tol;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (linked(taglines[i].bbox, taglines[j].bbox))
        parent[find(i)] = find(j);

  TaglineGrouping g;
  g.group_of.assign(n, -1);
  std::vector<int> id_of_root(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (id_of_root[root] < 0) {
      id_of_root[root] = static_cast<int>(g.groups.size());
      g.groups.emplace_back();
    }
    g.group_of[i] = id_of_root[root];
    g.groups[id_of_root[root]].push_back(i);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Style selection
// ---------------------------------------------------------------------------

struct UnderlayStyle {
  Shape shape;
  Color fill;
};

struct StyleAssignment {
  std::vector<int> group_of;             // tagline ordinal -> group id
  std::vector<FontMetrics> group_font;   // per group
  std::vector<Color> group_color;        // per group
  std::vector<UnderlayStyle> underlays;  // underlay ordinal -> style
};

// Color choice for one background region: the candidate maximizing
// w_c * normalized contrast + w_s * similarity-to-foreground, demoted to
// the max-contrast candidate when the winner reads poorly.
inline Color pick_tagline_color(const std::vector<Color>& candidates,
                                const Color& region_mean, const Color& fg_color,
                                const StyleConfig& cfg,
                                Warnings* warnings = nullptr) {
  if (candidates.empty())
    throw InvalidInput("pick_tagline_color: empty candidate set");
  std::size_t best = 0, best_contrast = 0;
  double best_score = -1.0, best_contrast_v = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double score =
        cfg.w_contrast * normalized_contrast(candidates[i], region_mean) +
        cfg.w_similarity * (1.0 - normalized_color_distance(candidates[i], fg_color));
    if (score > best_score) {
      best_score = score;
      best = i;
    }
    const double cr = contrast_ratio(candidates[i], region_mean);
    if (cr > best_contrast_v) {
      best_contrast_v = cr;
      best_contrast = i;
    }
  }
  if (contrast_ratio(candidates[best], region_mean) < cfg.min_contrast) {
    warn(warnings, "tagline color fallback: best-scoring candidate below "
                   "contrast threshold; using max-contrast candidate");
    return candidates[best_contrast];
  }
  return candidates[best];
}

// Font and color per group. Groups are processed in descending total-area
// order; the area rank also picks the font (largest group gets the first
// candidate font).
inline StyleAssignment select_tagline_style(
    const std::vector<Element>& taglines, const TaglineGrouping& grouping,
    const Color& fg_color, const Image& background,
    const std::vector<FontMetrics>& fonts, const std::vector<Color>& colors,
    const StyleConfig& cfg = {}, Warnings* warnings = nullptr) {
  if (fonts.empty() || colors.empty())
    throw InvalidInput("select_tagline_style: empty candidate sets");
  StyleAssignment out;
  out.group_of = grouping.group_of;
  out.group_font.resize(grouping.group_count());
  out.group_color.resize(grouping.group_count());

  std::vector<std::pair<double, std::size_t>> order;  // (-area, group)
  for (std::size_t gid = 0; gid < grouping.group_count(); ++gid) {
    double area = 0.0;
    for (std::size_t t : grouping.groups[gid])
      area += taglines[t].bbox.w * taglines[t].bbox.h;
    order.emplace_back(-area, gid);
  }
  std::sort(order.begin(), order.end());

  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const std::size_t gid = order[rank].second;
    std::vector<BBox> boxes;
    for (std::size_t t : grouping.groups[gid]) boxes.push_back(taglines[t].bbox);
    bool covered = false;
    Color mean = detail::region_mean_color_union(background, boxes, &covered);
    if (!covered) {
      warn(warnings, "tagline group " + std::to_string(gid) +
                         " covers no pixels; scoring against the full image");
      mean = region_mean_color(background, BBox{0.5, 0.5, 1.0, 1.0});
    }
    out.group_color[gid] =
        pick_tagline_color(colors, mean, fg_color, cfg, warnings);
    out.group_font[gid] = fonts[std::min(rank, fonts.size() - 1)];
  }
  return out;
}

// Fill color and shape for one underlay: fill maximizes contrast with the
// tagline color mixed with similarity to the background it sits on; the
// shape comes from the library by pixel aspect ratio.
inline UnderlayStyle select_underlay(const Element& underlay,
                                     const Color& tagline_color,
                                     const Image& background,
                                     const ShapeLibrary& lib,
                                     const std::vector<Color>& colors,
                                     const StyleConfig& cfg = {},
                                     Warnings* warnings = nullptr) {
  if (colors.empty()) throw InvalidInput("select_underlay: empty candidates");
  lib.validate();
  if (!(underlay.bbox.w > 0.0) || !(underlay.bbox.h > 0.0))
    throw InvalidGeometry("select_underlay: degenerate underlay bbox");

  Color mean{128, 128, 128};
  try {
    mean = region_mean_color(background, underlay.bbox);
  } catch (const InvalidGeometry&) {
    warn(warnings, "underlay covers no pixels; using neutral background mean");
  }
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < colors.size(); ++i) {
    const double score =
        cfg.w_contrast * normalized_contrast(colors[i], tagline_color) +
        cfg.w_similarity * color_similarity(colors[i], mean);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  const double px_aspect = (underlay.bbox.w * background.width) /
                           (underlay.bbox.h * background.height);
  return {select_shape(lib, px_aspect, warnings), colors[best]};
}

// Driver: grouping, tagline styles, then one underlay style each. An
// underlay anchors to the tagline it overlaps most (nearest center when
// disjoint from all) and contrasts against that group's color.
inline StyleAssignment assign_styles(
    const Layout& layout, const Color& fg_color, const Image& background,
    const std::vector<FontMetrics>& fonts, const std::vector<Color>& colors,
    const ShapeLibrary& lib, const StyleConfig& cfg = {},
    Warnings* warnings = nullptr) {
  std::vector<Element> taglines;
  std::vector<const Element*> underlays;
  for (const Element& e : layout.graphic) {
    if (e.kind == ElementKind::Tagline) taglines.push_back(e);
    if (e.kind == ElementKind::Underlay) underlays.push_back(&e);
  }
  const TaglineGrouping grouping = group_taglines(taglines, cfg);
  StyleAssignment styles = select_tagline_style(
      taglines, grouping, fg_color, background, fonts, colors, cfg, warnings);

  for (const Element* u : underlays) {
    Color anchor = fg_color;
    if (!taglines.empty()) {
      std::size_t best = 0;
      double best_inter = -1.0, best_dist = 1e9;
      for (std::size_t t = 0; t < taglines.size(); ++t) {
        const double inter =
            intersection_area(u->bbox.rect(), taglines[t].bbox.rect());
        const double dist = std::hypot(u->bbox.x - taglines[t].bbox.x,
                                       u->bbox.y - taglines[t].bbox.y);
        if (inter > best_inter ||
            (inter == best_inter && inter <= 0.0 && dist < best_dist)) {
          best = t;
          best_inter = inter;
          best_dist = dist;
        }
      }
      anchor = styles.group_color[grouping.group_of[best]];
    } else {
      warn(warnings, "underlay without taglines; contrasting against the "
                     "foreground color");
    }
    styles.underlays.push_back(
        select_underlay(*u, anchor, background, lib, colors, cfg, warnings));
  }
  return styles;
}

// ---------------------------------------------------------------------------
// Compositing
// ---------------------------------------------------------------------------

namespace detail {

inline void draw_underlay(Image& img, const Element& u, const UnderlayStyle& s) {
  const Rect box{u.bbox.left() * img.width, u.bbox.top() * img.height,
                 u.bbox.right() * img.width, u.bbox.bottom() * img.height};
  if (box.width() <= 0.0 || box.height() <= 0.0) return;
  const PixelRect pr = pixel_rect(u.bbox.clipped(), img.width, img.height);
  if (pr.empty()) return;
  const double aspect = box.width() / box.height();
  for (int y = pr.ys.begin; y < pr.ys.end; ++y) {
    const double v = (y + 0.5 - box.y0) / box.height();
    for (int x = pr.xs.begin; x < pr.xs.end; ++x) {
      const double uu = (x + 0.5 - box.x0) / box.width();
      if (shape_contains(s.shape, uu, v, aspect)) img.set_pixel(x, y, s.fill);
    }
  }
}

inline void paste_logo(Image& img, const Element& e, const Image& logo) {
  const Rect box{e.bbox.left() * img.width, e.bbox.top() * img.height,
                 e.bbox.right() * img.width, e.bbox.bottom() * img.height};
  if (box.width() < 1.0 || box.height() < 1.0 || logo.empty()) return;
  // Fit the logo inside the box preserving its own aspect ratio.
  const double scale = std::min(box.width() / logo.width,
                                box.height() / logo.height);
  const int w = std::max(1, static_cast<int>(std::floor(logo.width * scale)));
  const int h = std::max(1, static_cast<int>(std::floor(logo.height * scale)));
  const Image scaled = resize_bilinear(logo, w, h);
  const int ox = static_cast<int>(std::lround(box.x0 + 0.5 * (box.width() - w)));
  const int oy = static_cast<int>(std::lround(box.y0 + 0.5 * (box.height() - h)));
  composite_over(img, scaled, ox, oy);
}

}  // namespace detail

// Paints the graphic layer over the background: underlays, then taglines,
// then the logo. Output dimensions equal the background's; pixels outside
// every graphic bbox are untouched.
inline Image render(const Layout& layout, const Image& background,
                    const StyleAssignment& styles, const Image* logo = nullptr,
                    const StyleConfig& cfg = {}, Warnings* warnings = nullptr) {
  if (background.empty()) throw InvalidInput("render: empty background");
  Image out = background;
  const double min_font = cfg.min_font_px * background.width / 1024.0;

  std::size_t underlay_i = 0;
  for (const Element& e : layout.graphic) {
    if (e.kind != ElementKind::Underlay) continue;
    if (underlay_i < styles.underlays.size())
      detail::draw_underlay(out, e, styles.underlays[underlay_i]);
    ++underlay_i;
  }

  std::size_t tagline_i = 0;
  for (const Element& e : layout.graphic) {
    if (e.kind != ElementKind::Tagline) continue;
    const std::size_t t = tagline_i++;
    if (t >= styles.group_of.size()) continue;
    const int gid = styles.group_of[t];
    const Rect box{e.bbox.left() * out.width, e.bbox.top() * out.height,
                   e.bbox.right() * out.width, e.bbox.bottom() * out.height};
    if (box.width() <= 0.0 || box.height() <= 0.0 || !e.content ||
        e.content->empty())
      continue;
    const FontMetrics& font = styles.group_font[gid];
    const TextFit fit = fit_text(*e.content, box, font, min_font, warnings);
    draw_text(out, fit, box, font, styles.group_color[gid]);
  }

  for (const Element& e : layout.graphic) {
    if (e.kind != ElementKind::Logo) continue;
    if (logo && !logo->empty()) detail::paste_logo(out, e, *logo);
    else warn(warnings, "logo element present but no logo image supplied");
  }
  return out;
}

}  // namespace adkit

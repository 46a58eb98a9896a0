#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "adkit/error.hpp"
#include "adkit/geometry.hpp"
#include "adkit/image.hpp"
#include "adkit/layout.hpp"

namespace adkit {

// Graphic elements thinner than 0.1% of the canvas in either direction are
// invalid: they count against Val and are excluded from every other graphic
// metric.
constexpr double kValidityMinExtent = 0.001;

inline bool element_valid(const Element& e) {
  return e.bbox.w > kValidityMinExtent && e.bbox.h > kValidityMinExtent;
}

inline std::vector<const Element*> valid_graphic(const Layout& l) {
  std::vector<const Element*> out;
  for (const Element& e : l.graphic)
    if (element_valid(e)) out.push_back(&e);
  return out;
}

inline std::size_t tagline_count(const Layout& l) {
  std::size_t n = 0;
  for (const Element& e : l.graphic) n += e.kind == ElementKind::Tagline;
  return n;
}

// Subject region: either the subject bbox or a canvas-sized binary mask.
struct SubjectRegion {
  std::optional<BBox> bbox;
  Mask mask;

  static SubjectRegion from_bbox(BBox b) { return {b, {}}; }
  static SubjectRegion from_mask(Mask m) { return {std::nullopt, std::move(m)}; }
  bool has_mask() const { return !mask.empty(); }
};

// ---------------------------------------------------------------------------
// Geometry kernel
// ---------------------------------------------------------------------------

// Exact area of the union of boxes clipped to the unit canvas.
inline double union_area(const std::vector<BBox>& boxes) {
  std::vector<Rect> rects;
  rects.reserve(boxes.size());
  for (const BBox& b : boxes) rects.push_back(b.clipped());
  return union_area(rects);
}

namespace detail {

inline std::vector<Rect> clipped_rects(const std::vector<const Element*>& es) {
  std::vector<Rect> rects;
  rects.reserve(es.size());
  for (const Element* e : es) rects.push_back(e->bbox.clipped());
  return rects;
}

// Area of (union of rects) ∩ clip — each piece is itself a rectangle, so
// the union sweep applies directly.
inline double union_area_within(const std::vector<Rect>& rects,
                                const Rect& clip) {
  std::vector<Rect> pieces;
  pieces.reserve(rects.size());
  for (const Rect& r : rects) {
    Rect p = intersect(r, clip);
    if (!p.empty()) pieces.push_back(p);
  }
  return union_area(pieces);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Graphic metrics
// ---------------------------------------------------------------------------

// Fraction of graphic elements above the minimum extent; 1 when there are
// no graphic elements at all.
inline double validity(const Layout& l) {
  if (l.graphic.empty()) return 1.0;
  std::size_t ok = 0;
  for (const Element& e : l.graphic) ok += element_valid(e);
  return static_cast<double>(ok) / static_cast<double>(l.graphic.size());
}

// Mean IoU over unordered pairs of valid non-underlay graphic elements.
inline double overlap(const Layout& l) {
  std::vector<Rect> rects;
  for (const Element& e : l.graphic)
    if (element_valid(e) && e.kind != ElementKind::Underlay)
      rects.push_back(e.bbox.clipped());
  if (rects.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < rects.size(); ++i)
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      sum += iou(rects[i], rects[j]);
      ++pairs;
    }
  return sum / static_cast<double>(pairs);
}

// Mean over valid graphic elements of the distance to the nearest alignment
// line of any other element, over six axes: left, x-center, right, top,
// y-center, bottom. Raw (unclipped) edges, so joint translation of the
// whole layout leaves the value unchanged.
inline double alignment(const Layout& l) {
  const auto elems = valid_graphic(l);
  if (elems.size() < 2) return 0.0;
  struct Axes {
    double v[6];
  };
  std::vector<Axes> axes;
  axes.reserve(elems.size());
  for (const Element* e : elems) {
    const BBox& b = e->bbox;
    axes.push_back({{b.left(), b.x, b.right(), b.top(), b.y, b.bottom()}});
  }
  double total = 0.0;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < axes.size(); ++j) {
      if (j == i) continue;
      for (int a = 0; a < 6; ++a)
        best = std::min(best, std::abs(axes[i].v[a] - axes[j].v[a]));
    }
    total += best;
  }
  return total / static_cast<double>(axes.size());
}

struct UnderlayScores {
  std::optional<double> und_l;
  std::optional<double> und_s;
};

// Loose score: best tagline overlap fraction per underlay. Strict score:
// whether some tagline is fully contained. Absent when the layout carries
// no valid underlay.
inline UnderlayScores underlay_scores(const Layout& l) {
  std::vector<Rect> underlays;
  std::vector<Rect> taglines;
  for (const Element& e : l.graphic) {
    if (!element_valid(e)) continue;
    if (e.kind == ElementKind::Underlay) underlays.push_back(e.bbox.clipped());
    if (e.kind == ElementKind::Tagline) taglines.push_back(e.bbox.clipped());
  }
  if (underlays.empty()) return {};
  double loose_sum = 0.0;
  double strict_sum = 0.0;
  for (const Rect& u : underlays) {
    double loose = 0.0;
    bool contained = false;
    for (const Rect& t : taglines) {
      if (t.area() <= 0.0) continue;
      loose = std::max(loose, intersection_area(u, t) / t.area());
      contained = contained || u.contains(t);
    }
    loose_sum += loose;
    strict_sum += contained ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(underlays.size());
  return {loose_sum / n, strict_sum / n};
}

// ---------------------------------------------------------------------------
// Content metrics
// ---------------------------------------------------------------------------

namespace detail {

struct PixelCounts {
  std::uint64_t graphic = 0;
  std::uint64_t graphic_and_subject = 0;
  std::uint64_t subject = 0;
  std::uint64_t total = 0;
};

// Single pass over the mask grid: per row, mark the spans of the graphic
// boxes and tally coverage against the mask.
inline PixelCounts count_pixels(const std::vector<Rect>& graphic,
                                const Mask& mask) {
  PixelCounts c;
  c.total = static_cast<std::uint64_t>(mask.width) * mask.height;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(mask.width));
  std::vector<PixelRect> prects;
  prects.reserve(graphic.size());
  for (const Rect& r : graphic)
    prects.push_back(pixel_rect(r, mask.width, mask.height));
  for (int y = 0; y < mask.height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    bool any = false;
    for (const PixelRect& pr : prects) {
      if (y < pr.ys.begin || y >= pr.ys.end || pr.xs.empty()) continue;
      std::fill(row.begin() + pr.xs.begin, row.begin() + pr.xs.end, 1);
      any = true;
    }
    const std::uint8_t* m = mask.data.data() + static_cast<std::size_t>(y) * mask.width;
    for (int x = 0; x < mask.width; ++x) {
      const bool in_subject = m[x] != 0;
      c.subject += in_subject;
      if (any && row[x]) {
        ++c.graphic;
        c.graphic_and_subject += in_subject;
      }
    }
  }
  return c;
}

}  // namespace detail

// Fraction of the non-subject canvas covered by valid graphic elements.
inline double utility(const Layout& l, const SubjectRegion& subject,
                      Warnings* warnings = nullptr) {
  const auto elems = valid_graphic(l);
  const auto rects = detail::clipped_rects(elems);
  if (subject.has_mask()) {
    const auto c = detail::count_pixels(rects, subject.mask);
    const std::uint64_t denom = c.total - c.subject;
    if (denom == 0) {
      warn(warnings, "utility: subject mask covers the whole canvas");
      return 0.0;
    }
    return static_cast<double>(c.graphic - c.graphic_and_subject) /
           static_cast<double>(denom);
  }
  if (!subject.bbox) throw InvalidInput("utility: empty subject region");
  const Rect s = subject.bbox->clipped();
  const double denom = 1.0 - s.area();
  if (denom <= 0.0) {
    warn(warnings, "utility: subject bbox covers the whole canvas");
    return 0.0;
  }
  const double g = union_area(rects);
  const double g_in_s = detail::union_area_within(rects, s);
  return (g - g_in_s) / denom;
}

// Fraction of the graphic coverage that falls on the subject.
inline double occlusion(const Layout& l, const SubjectRegion& subject) {
  const auto elems = valid_graphic(l);
  if (elems.empty()) return 0.0;
  const auto rects = detail::clipped_rects(elems);
  if (subject.has_mask()) {
    const auto c = detail::count_pixels(rects, subject.mask);
    if (c.graphic == 0) return 0.0;
    return static_cast<double>(c.graphic_and_subject) /
           static_cast<double>(c.graphic);
  }
  if (!subject.bbox) throw InvalidInput("occlusion: empty subject region");
  const double g = union_area(rects);
  if (g <= 0.0) return 0.0;
  return detail::union_area_within(rects, subject.bbox->clipped()) / g;
}

// Mean gradient energy of the background under tagline boxes. Grayscale by
// 0.299/0.587/0.114 luma, central differences with clamped borders,
// magnitude normalized by the maximum achievable step (127.5 * sqrt(2)).
// Absent when the layout has no valid tagline.
inline std::optional<double> unreadability(const Layout& l,
                                           const Image& background) {
  if (background.empty())
    throw InvalidInput("unreadability: empty background image");
  std::vector<Rect> boxes;
  for (const Element& e : l.graphic)
    if (e.kind == ElementKind::Tagline && element_valid(e))
      boxes.push_back(e.bbox.clipped());
  if (boxes.empty()) return std::nullopt;

  const int w = background.width;
  const int h = background.height;
  std::vector<float> gray(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Color c = background.pixel(x, y);
      gray[static_cast<std::size_t>(y) * w + x] =
          static_cast<float>(0.299 * c.r + 0.587 * c.g + 0.114 * c.b);
    }
  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return gray[static_cast<std::size_t>(y) * w + x];
  };
  const double norm = 127.5 * std::sqrt(2.0);

  double total = 0.0;
  for (const Rect& r : boxes) {
    const PixelRect pr = pixel_rect(r, w, h);
    double sum = 0.0;
    std::uint64_t n = 0;
    for (int y = pr.ys.begin; y < pr.ys.end; ++y)
      for (int x = pr.xs.begin; x < pr.xs.end; ++x) {
        const double gx = 0.5 * (at(x + 1, y) - at(x - 1, y));
        const double gy = 0.5 * (at(x, y + 1) - at(x, y - 1));
        sum += std::sqrt(gx * gx + gy * gy) / norm;
        ++n;
      }
    total += n > 0 ? sum / static_cast<double>(n) : 0.0;
  }
  return total / static_cast<double>(boxes.size());
}

// ---------------------------------------------------------------------------
// Prediction-set metrics
// ---------------------------------------------------------------------------

struct TmrItem {
  const Layout* layout;
  std::size_t input_taglines;
};

// Fraction of samples whose predicted tagline-box count equals the input
// tagline count.
inline double tagline_match_rate(const std::vector<TmrItem>& items) {
  if (items.empty()) throw InvalidInput("tagline_match_rate: empty set");
  std::size_t matches = 0;
  for (const TmrItem& it : items)
    matches += tagline_count(*it.layout) == it.input_taglines;
  return static_cast<double>(matches) / static_cast<double>(items.size());
}

constexpr double kFrcTolerance = 0.015;

inline bool fg_ratio_correct(const Layout& l, const CanvasSpec& spec) {
  if (!(l.subject.bbox.h > 0.0)) return false;
  const double decoded = rkbr_decode_ratio(l.subject.bbox, spec);
  return std::abs(decoded - spec.fg_ratio) / spec.fg_ratio <= kFrcTolerance;
}

struct FrcItem {
  const Layout* layout;
  const CanvasSpec* spec;
};

// Fraction of samples whose decoded subject aspect ratio is within 1.5% of
// the true foreground ratio.
inline double fg_ratio_correctness(const std::vector<FrcItem>& items) {
  if (items.empty()) throw InvalidInput("fg_ratio_correctness: empty set");
  std::size_t correct = 0;
  for (const FrcItem& it : items)
    correct += fg_ratio_correct(*it.layout, *it.spec);
  return static_cast<double>(correct) / static_cast<double>(items.size());
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct LayoutMetrics {
  double val = 1.0;
  double ove = 0.0;
  double ali = 0.0;
  std::optional<double> und_l;
  std::optional<double> und_s;
  double uti = 0.0;
  double occ = 0.0;
  std::optional<double> rea;
};

inline LayoutMetrics compute_layout_metrics(const Layout& l,
                                            const SubjectRegion& subject,
                                            const Image* background = nullptr,
                                            Warnings* warnings = nullptr) {
  if (background && subject.has_mask() &&
      (background->width != subject.mask.width ||
       background->height != subject.mask.height))
    throw InvalidInput("background dimensions do not match the subject mask");
  LayoutMetrics m;
  m.val = validity(l);
  m.ove = overlap(l);
  m.ali = alignment(l);
  const UnderlayScores u = underlay_scores(l);
  m.und_l = u.und_l;
  m.und_s = u.und_s;
  m.uti = utility(l, subject, warnings);
  m.occ = occlusion(l, subject);
  if (background) m.rea = unreadability(l, *background);
  return m;
}

// Mean with a contribution count; addition is associative and
// order-independent, so batch aggregation can be reduced in any order.
struct MeanCount {
  double sum = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    ++n;
  }
  void add(const std::optional<double>& v) {
    if (v) add(*v);
  }
  bool defined() const { return n > 0; }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
};

struct SampleMetrics {
  std::string id;
  LayoutMetrics metrics;
  std::optional<bool> tagline_match;
  std::optional<bool> fg_ratio_correct;
};

struct MetricsReport {
  std::vector<SampleMetrics> samples;
  std::vector<std::string> unpaired_predictions;
  std::vector<std::string> unpaired_references;

  MeanCount val, ove, ali, und_l, und_s, uti, occ, rea, tmr, frc;

  void add(SampleMetrics s) {
    val.add(s.metrics.val);
    ove.add(s.metrics.ove);
    ali.add(s.metrics.ali);
    und_l.add(s.metrics.und_l);
    und_s.add(s.metrics.und_s);
    uti.add(s.metrics.uti);
    occ.add(s.metrics.occ);
    rea.add(s.metrics.rea);
    if (s.tagline_match) tmr.add(*s.tagline_match ? 1.0 : 0.0);
    if (s.fg_ratio_correct) frc.add(*s.fg_ratio_correct ? 1.0 : 0.0);
    samples.push_back(std::move(s));
  }

  nlohmann::json to_json() const {
    auto agg = [](const MeanCount& m) {
      nlohmann::json j;
      j["count"] = m.n;
      if (m.defined()) j["mean"] = m.mean();
      return j;
    };
    nlohmann::json j;
    j["aggregate"] = {{"val", agg(val)},   {"ove", agg(ove)},
                      {"ali", agg(ali)},   {"und_l", agg(und_l)},
                      {"und_s", agg(und_s)}, {"uti", agg(uti)},
                      {"occ", agg(occ)},   {"rea", agg(rea)},
                      {"tmr", agg(tmr)},   {"frc", agg(frc)}};
    j["samples"] = nlohmann::json::array();
    for (const SampleMetrics& s : samples) {
      nlohmann::json row;
      row["id"] = s.id;
      row["val"] = s.metrics.val;
      row["ove"] = s.metrics.ove;
      row["ali"] = s.metrics.ali;
      if (s.metrics.und_l) row["und_l"] = *s.metrics.und_l;
      if (s.metrics.und_s) row["und_s"] = *s.metrics.und_s;
      row["uti"] = s.metrics.uti;
      row["occ"] = s.metrics.occ;
      if (s.metrics.rea) row["rea"] = *s.metrics.rea;
      if (s.tagline_match) row["tagline_match"] = *s.tagline_match;
      if (s.fg_ratio_correct) row["fg_ratio_correct"] = *s.fg_ratio_correct;
      j["samples"].push_back(std::move(row));
    }
    j["unpaired_predictions"] = unpaired_predictions;
    j["unpaired_references"] = unpaired_references;
    return j;
  }
};

}  // namespace adkit

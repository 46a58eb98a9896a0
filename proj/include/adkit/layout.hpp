#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "adkit/error.hpp"
#include "adkit/geometry.hpp"

namespace adkit {

// Normalized bounding box. (x, y) is the box center, w/h the extents; every
// value lives in [0,1]. A box may still spill over the canvas edge (e.g.
// x=0.9, w=0.4); geometric metrics clip to the unit canvas first.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return x - 0.5 * w; }
  double right() const { return x + 0.5 * w; }
  double top() const { return y - 0.5 * h; }
  double bottom() const { return y + 0.5 * h; }

  Rect rect() const { return {left(), top(), right(), bottom()}; }
  Rect clipped() const { return clip_to_unit(rect()); }

  bool in_range() const {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    return ok(x) && ok(y) && ok(w) && ok(h);
  }

  bool operator==(const BBox&) const = default;
};

enum class ElementKind { Subject, Nongraphic, Logo, Tagline, Underlay };

inline bool is_graphic(ElementKind k) {
  return k == ElementKind::Logo || k == ElementKind::Tagline ||
         k == ElementKind::Underlay;
}

inline const char* kind_name(ElementKind k) {
  switch (k) {
    case ElementKind::Subject: return "subject";
    case ElementKind::Nongraphic: return "nongraphic";
    case ElementKind::Logo: return "logo";
    case ElementKind::Tagline: return "tagline";
    case ElementKind::Underlay: return "underlay";
  }
  return "?";
}

// One layout element. `name` is the instance label of a nongraphic element;
// `content` is present exactly for taglines.
struct Element {
  ElementKind kind = ElementKind::Nongraphic;
  BBox bbox;
  std::string name;
  std::optional<std::string> content;

  static Element subject(BBox b) { return {ElementKind::Subject, b, {}, {}}; }
  static Element nongraphic(std::string label, BBox b) {
    return {ElementKind::Nongraphic, b, std::move(label), {}};
  }
  static Element logo(BBox b) { return {ElementKind::Logo, b, {}, {}}; }
  static Element tagline(std::string text, BBox b) {
    return {ElementKind::Tagline, b, {}, std::move(text)};
  }
  static Element underlay(BBox b) { return {ElementKind::Underlay, b, {}, {}}; }

  bool operator==(const Element&) const = default;
};

// Raster-scan order: ascending top-left y, then top-left x. Ties broken by
// kind (logo < tagline < underlay), then by the remaining fields so the
// order is total and sorting is permutation-invariant.
inline bool raster_less(const Element& a, const Element& b) {
  const int ka = static_cast<int>(a.kind);
  const int kb = static_cast<int>(b.kind);
  const auto key = [](const Element& e, int k) {
    return std::make_tuple(e.bbox.top(), e.bbox.left(), k, e.bbox.w, e.bbox.h,
                           e.content.value_or(std::string{}), e.name);
  };
  return key(a, ka) < key(b, kb);
}

inline void sort_raster(std::vector<Element>& elements) {
  std::sort(elements.begin(), elements.end(), raster_less);
}

// Three-part layout: the product subject, nongraphic objects to synthesize
// in the background, and graphic overlays (logo / tagline / underlay) kept
// in raster-scan order.
struct Layout {
  Element subject;
  std::vector<Element> nongraphic;
  std::vector<Element> graphic;

  bool operator==(const Layout&) const = default;
};

enum class OcclusionMode { NoOcc, AllowOcc };

struct OcclusionClass {
  OcclusionMode mode = OcclusionMode::NoOcc;
  std::string product_class;

  static OcclusionClass no_occ(std::string cls) {
    return {OcclusionMode::NoOcc, std::move(cls)};
  }
  static OcclusionClass allow_occ(std::string cls) {
    return {OcclusionMode::AllowOcc, std::move(cls)};
  }
};

// Target canvas description. r2 = width/height is the canvas aspect ratio,
// r1 the aspect ratio of the product foreground.
struct CanvasSpec {
  int width = 0;
  int height = 0;
  double canvas_ratio = 0.0;  // r2
  double fg_ratio = 0.0;      // r1
  OcclusionClass occlusion;
  std::optional<double> logo_ratio;

  static CanvasSpec make(int width, int height, double fg_ratio,
                         OcclusionClass occ,
                         std::optional<double> logo_ratio = std::nullopt) {
    CanvasSpec s;
    s.width = width;
    s.height = height;
    s.canvas_ratio =
        height > 0 ? static_cast<double>(width) / static_cast<double>(height)
                   : 0.0;
    s.fg_ratio = fg_ratio;
    s.occlusion = std::move(occ);
    s.logo_ratio = logo_ratio;
    s.validate();
    return s;
  }

  void validate() const {
    if (width <= 0 || height <= 0)
      throw InvalidInput("canvas dimensions must be positive");
    if (!(fg_ratio > 0.0) || !std::isfinite(fg_ratio))
      throw InvalidInput("fg_ratio must be strictly positive");
    if (!(canvas_ratio > 0.0) || !std::isfinite(canvas_ratio))
      throw InvalidInput("canvas_ratio must be strictly positive");
    const double expect = static_cast<double>(width) / height;
    if (std::abs(canvas_ratio - expect) > 1e-9)
      throw InvalidInput("canvas_ratio does not match width/height");
    if (logo_ratio && !(*logo_ratio > 0.0))
      throw InvalidInput("logo_ratio must be strictly positive");
  }
};

struct PromptPair {
  std::string fore;
  std::string back;

  bool operator==(const PromptPair&) const = default;

  void validate() const {
    if (fore.empty() || back.empty())
      throw InvalidInput("prompt descriptions must be non-empty");
  }
};

// ---------------------------------------------------------------------------
// Ratio-keeping bbox representation
// ---------------------------------------------------------------------------

// Builds a subject box from center and height: w = h * r1 / r2, so the box
// rendered on the target canvas keeps the foreground aspect ratio. A width
// that leaves [0,1] is clamped and reported through `warnings`.
inline BBox rkbr_encode(double center_x, double center_y, double h,
                        const CanvasSpec& spec, Warnings* warnings = nullptr) {
  spec.validate();
  if (!(h > 0.0) || !std::isfinite(h))
    throw InvalidGeometry("rkbr_encode: height must be strictly positive");
  if (h > 1.0) throw InvalidGeometry("rkbr_encode: height must be <= 1");
  if (!(center_x >= 0.0 && center_x <= 1.0 && center_y >= 0.0 &&
        center_y <= 1.0))
    throw InvalidGeometry("rkbr_encode: center must lie in [0,1]^2");

  double w = h * spec.fg_ratio / spec.canvas_ratio;
  if (w > 1.0) {
    warn(warnings, "rkbr_encode: width clamped from " + std::to_string(w) +
                       " to 1.0");
    w = 1.0;
  }
  return {center_x, center_y, w, h};
}

// Inverse map: the aspect ratio the box would have once rendered.
inline double rkbr_decode_ratio(const BBox& b, const CanvasSpec& spec) {
  if (!(b.h > 0.0))
    throw InvalidGeometry("rkbr_decode_ratio: box height must be positive");
  return (b.w / b.h) * spec.canvas_ratio;
}

// ---------------------------------------------------------------------------
// Class-conditioned layout prediction strings
// ---------------------------------------------------------------------------

inline std::string cclp_condition(const OcclusionClass& occ) {
  if (occ.product_class.empty())
    throw InvalidInput("cclp_condition: product class must be non-empty");
  const std::string head = "The class of subject is " + occ.product_class + ". ";
  if (occ.mode == OcclusionMode::NoOcc)
    return head +
           "The bounding boxes of taglines should never occlude the subject.";
  return head +
         "The bounding boxes of taglines are allowed to occlude the subject.";
}

inline bool is_cclp_condition(const std::string& text) {
  // Matches either template with any non-empty class between the anchors.
  const std::string prefix = "The class of subject is ";
  const std::string no_occ =
      ". The bounding boxes of taglines should never occlude the subject.";
  const std::string allow =
      ". The bounding boxes of taglines are allowed to occlude the subject.";
  if (text.rfind(prefix, 0) != 0) return false;
  for (const std::string& tail : {no_occ, allow}) {
    if (text.size() > prefix.size() + tail.size() &&
        text.compare(text.size() - tail.size(), tail.size(), tail) == 0)
      return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Layout validation
// ---------------------------------------------------------------------------

inline void validate_element(const Element& e, const std::string& path) {
  if (!e.bbox.in_range())
    throw SchemaViolation(path + ".bbox", "coordinates must lie in [0,1]");
  if (e.kind == ElementKind::Tagline && !e.content)
    throw SchemaViolation(path, "tagline element requires content");
  if (e.kind != ElementKind::Tagline && e.content)
    throw SchemaViolation(path, "content is only allowed on taglines");
  if (e.kind == ElementKind::Nongraphic && e.name.empty())
    throw SchemaViolation(path, "nongraphic element requires an instance name");
}

inline void validate_layout(const Layout& l) {
  if (l.subject.kind != ElementKind::Subject)
    throw SchemaViolation("/subject", "subject element has wrong kind");
  validate_element(l.subject, "/subject");
  for (std::size_t i = 0; i < l.nongraphic.size(); ++i) {
    const auto path = "/elements/" + std::to_string(i);
    if (l.nongraphic[i].kind != ElementKind::Nongraphic)
      throw SchemaViolation(path, "expected a nongraphic element");
    validate_element(l.nongraphic[i], path);
  }
  for (std::size_t i = 0; i < l.graphic.size(); ++i) {
    const auto path = "/graphic/" + std::to_string(i);
    if (!is_graphic(l.graphic[i].kind))
      throw SchemaViolation(path, "expected a graphic element");
    validate_element(l.graphic[i], path);
  }
  if (!std::is_sorted(l.graphic.begin(), l.graphic.end(), raster_less))
    throw SchemaViolation("/graphic", "graphic elements not in raster order");
}

// Builds a layout and normalizes graphic order instead of rejecting it.
inline Layout make_layout(Element subject, std::vector<Element> nongraphic,
                          std::vector<Element> graphic) {
  Layout l{std::move(subject), std::move(nongraphic), std::move(graphic)};
  sort_raster(l.graphic);
  validate_layout(l);
  return l;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization
//
// Schema (shipped in schemas/layout.schema.json):
//   { "subject":  {"type": "subject", "bbox": [x, y, w, h]},
//     "elements": [{"type": "<instance name>", "bbox": [...]}, ...],
//     "graphic":  [{"type": "tagline", "content": "...", "bbox": [...]},
//                  {"type": "underlay" | "logo", "bbox": [...]}, ...] }
// ---------------------------------------------------------------------------

struct ParseOptions {
  // When set, out-of-range coordinates are clamped to [0,1] with a warning
  // instead of raising SchemaViolation. Model outputs are parsed leniently,
  // dataset references strictly.
  bool clamp_out_of_range = false;
};

inline nlohmann::json bbox_to_json(const BBox& b) {
  return nlohmann::json::array({b.x, b.y, b.w, b.h});
}

inline nlohmann::json element_to_json(const Element& e) {
  nlohmann::json j;
  switch (e.kind) {
    case ElementKind::Subject: j["type"] = "subject"; break;
    case ElementKind::Nongraphic: j["type"] = e.name; break;
    default: j["type"] = kind_name(e.kind); break;
  }
  if (e.kind == ElementKind::Tagline) j["content"] = *e.content;
  j["bbox"] = bbox_to_json(e.bbox);
  return j;
}

inline nlohmann::json layout_to_json(const Layout& l) {
  validate_layout(l);
  nlohmann::json j;
  j["subject"] = element_to_json(l.subject);
  j["elements"] = nlohmann::json::array();
  for (const Element& e : l.nongraphic) j["elements"].push_back(element_to_json(e));
  j["graphic"] = nlohmann::json::array();
  for (const Element& e : l.graphic) j["graphic"].push_back(element_to_json(e));
  return j;
}

inline std::string serialize_layout(const Layout& l) {
  return layout_to_json(l).dump(2);
}

namespace detail {

inline double parse_coord(const nlohmann::json& v, const std::string& path,
                          const ParseOptions& opts, Warnings* warnings) {
  if (!v.is_number())
    throw SchemaViolation(path, "bbox entry must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaViolation(path, "bbox entry must be finite");
  if (d < 0.0 || d > 1.0) {
    if (!opts.clamp_out_of_range)
      throw SchemaViolation(path, "bbox entry outside [0,1]");
    const double clamped = std::clamp(d, 0.0, 1.0);
    warn(warnings, path + ": clamped " + std::to_string(d) + " to " +
                       std::to_string(clamped));
    d = clamped;
  }
  return d;
}

inline BBox parse_bbox(const nlohmann::json& j, const std::string& path,
                       const ParseOptions& opts, Warnings* warnings) {
  if (!j.is_array() || j.size() != 4)
    throw SchemaViolation(path, "bbox must be an array of four numbers");
  BBox b;
  b.x = parse_coord(j[0], path + "/0", opts, warnings);
  b.y = parse_coord(j[1], path + "/1", opts, warnings);
  b.w = parse_coord(j[2], path + "/2", opts, warnings);
  b.h = parse_coord(j[3], path + "/3", opts, warnings);
  return b;
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline Element parse_element(const nlohmann::json& j, const std::string& path,
                             bool graphic_section, const ParseOptions& opts,
                             Warnings* warnings) {
  if (!j.is_object()) throw SchemaViolation(path, "element must be an object");
  if (!j.contains("type")) throw SchemaViolation(path, "missing key: type");
  if (!j.contains("bbox")) throw SchemaViolation(path, "missing key: bbox");
  if (!j["type"].is_string() || j["type"].get<std::string>().empty())
    throw SchemaViolation(path + "/type", "type must be a non-empty string");

  const std::string type = j["type"].get<std::string>();
  const std::string type_lc = lower(type);
  BBox bbox = parse_bbox(j["bbox"], path + "/bbox", opts, warnings);

  Element e;
  if (graphic_section) {
    if (type_lc == "logo") e = Element::logo(bbox);
    else if (type_lc == "underlay") e = Element::underlay(bbox);
    else if (type_lc == "tagline") {
      if (!j.contains("content"))
        throw SchemaViolation(path, "tagline element requires content");
      if (!j["content"].is_string())
        throw SchemaViolation(path + "/content", "content must be a string");
      e = Element::tagline(j["content"].get<std::string>(), bbox);
    } else {
      throw SchemaViolation(path + "/type",
                            "unknown graphic type: " + type);
    }
  } else {
    e = Element::nongraphic(type, bbox);
  }
  if (e.kind != ElementKind::Tagline && j.contains("content"))
    throw SchemaViolation(path, "content is only allowed on taglines");
  return e;
}

}  // namespace detail

inline Layout layout_from_json(const nlohmann::json& j,
                               const ParseOptions& opts = {},
                               Warnings* warnings = nullptr) {
  if (!j.is_object()) throw SchemaViolation("/", "layout must be an object");
  for (const char* key : {"subject", "elements", "graphic"})
    if (!j.contains(key))
      throw SchemaViolation("/", std::string("missing key: ") + key);

  const auto& js = j["subject"];
  if (!js.is_object()) throw SchemaViolation("/subject", "must be an object");
  if (!js.contains("bbox")) throw SchemaViolation("/subject", "missing key: bbox");
  if (js.contains("content"))
    throw SchemaViolation("/subject", "content is only allowed on taglines");
  Layout l;
  l.subject = Element::subject(
      detail::parse_bbox(js["bbox"], "/subject/bbox", opts, warnings));

  if (!j["elements"].is_array())
    throw SchemaViolation("/elements", "must be an array");
  for (std::size_t i = 0; i < j["elements"].size(); ++i)
    l.nongraphic.push_back(detail::parse_element(
        j["elements"][i], "/elements/" + std::to_string(i), false, opts,
        warnings));

  if (!j["graphic"].is_array())
    throw SchemaViolation("/graphic", "must be an array");
  for (std::size_t i = 0; i < j["graphic"].size(); ++i)
    l.graphic.push_back(detail::parse_element(
        j["graphic"][i], "/graphic/" + std::to_string(i), true, opts,
        warnings));

  if (!std::is_sorted(l.graphic.begin(), l.graphic.end(), raster_less)) {
    warn(warnings, "/graphic: elements re-sorted into raster-scan order");
    sort_raster(l.graphic);
  }
  validate_layout(l);
  return l;
}

inline Layout parse_layout(const std::string& text,
                           const ParseOptions& opts = {},
                           Warnings* warnings = nullptr) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaViolation("/", std::string("malformed JSON: ") + e.what());
  }
  return layout_from_json(j, opts, warnings);
}

}  // namespace adkit

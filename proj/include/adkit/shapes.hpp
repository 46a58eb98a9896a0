#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adkit/error.hpp"

namespace adkit {

// An underlay shape: an id, the aspect-ratio range it suits, and an outline.
// Outlines are either one of the built-in procedural forms ("rect",
// "rounded", "pill", "ellipse") or a polygon in unit-square coordinates;
// both scale to the target bbox.
struct Shape {
  std::string id;
  double aspect_min = 0.0;
  double aspect_max = 0.0;
  std::string outline = "rect";
  std::vector<std::pair<double, double>> polygon;  // used when outline=="polygon"

  double aspect_mid() const { return 0.5 * (aspect_min + aspect_max); }
};

struct ShapeLibrary {
  std::vector<Shape> shapes;

  void validate() const {
    if (shapes.empty()) throw InvalidInput("shape library must be non-empty");
    for (const Shape& s : shapes) {
      if (!(s.aspect_min > 0.0) || !(s.aspect_max >= s.aspect_min))
        throw InvalidInput("shape " + s.id + ": bad aspect range");
      if (s.outline == "polygon" && s.polygon.size() < 3)
        throw InvalidInput("shape " + s.id + ": polygon needs >= 3 points");
    }
  }

  // The default library: rectangle, rounded rectangle, pill, circle.
  static ShapeLibrary builtin() {
    ShapeLibrary lib;
    lib.shapes = {{"rect", 10.0, 50.0, "rect", {}},
                  {"rounded", 1.1, 4.0, "rounded", {}},
                  {"pill", 4.0, 10.0, "pill", {}},
                  {"circle", 0.5, 1.1, "ellipse", {}}};
    return lib;
  }
};

// Membership test in unit-square shape coordinates (u, v in [0,1]).
// `px_aspect` is the pixel aspect of the target box, needed so corner radii
// stay circular after the box scale.
inline bool shape_contains(const Shape& shape, double u, double v,
                           double px_aspect) {
  if (u < 0.0 || u >= 1.0 || v < 0.0 || v >= 1.0) return false;
  const double a = std::max(px_aspect, 1e-9);

  auto rounded = [&](double radius_frac) {
    // radius as a fraction of the box height, in v units; u units differ by
    // the aspect.
    const double rv = radius_frac;
    const double ru = radius_frac / a;
    const double cu = std::clamp(u, ru, 1.0 - ru);
    const double cv = std::clamp(v, rv, 1.0 - rv);
    const double du = (u - cu) / ru;
    const double dv = (v - cv) / rv;
    return du * du + dv * dv <= 1.0;
  };

  if (shape.outline == "rect") return true;
  if (shape.outline == "rounded") return rounded(0.2);
  if (shape.outline == "pill") return rounded(0.5);
  if (shape.outline == "ellipse") {
    const double du = 2.0 * u - 1.0;
    const double dv = 2.0 * v - 1.0;
    return du * du + dv * dv <= 1.0;
  }
  if (shape.outline == "polygon") {
    // Even-odd winding.
    bool inside = false;
    const auto& pts = shape.polygon;
    for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
      const auto [xi, yi] = pts[i];
      const auto [xj, yj] = pts[j];
      if ((yi > v) != (yj > v) &&
          u < (xj - xi) * (v - yi) / (yj - yi) + xi)
        inside = !inside;
    }
    return inside;
  }
  throw InvalidInput("unknown outline: " + shape.outline);
}

// Picks the shape whose declared aspect range contains `aspect`; among
// several hits the closest range midpoint wins, and when nothing matches
// the nearest midpoint is used with a warning.
inline const Shape& select_shape(const ShapeLibrary& lib, double aspect,
                                 Warnings* warnings = nullptr) {
  lib.validate();
  const Shape* best_in = nullptr;
  const Shape* best_any = nullptr;
  double best_in_d = 0.0, best_any_d = 0.0;
  for (const Shape& s : lib.shapes) {
    const double d = std::abs(aspect - s.aspect_mid());
    if (!best_any || d < best_any_d) {
      best_any = &s;
      best_any_d = d;
    }
    if (aspect >= s.aspect_min && aspect <= s.aspect_max &&
        (!best_in || d < best_in_d)) {
      best_in = &s;
      best_in_d = d;
    }
  }
  if (best_in) return *best_in;
  warn(warnings, "select_shape: aspect " + std::to_string(aspect) +
                     " outside every range; using nearest shape " +
                     best_any->id);
  return *best_any;
}

// ---------------------------------------------------------------------------
// JSON manifest
// ---------------------------------------------------------------------------

inline ShapeLibrary shape_library_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("shapes") || !j["shapes"].is_array())
    throw SchemaViolation("/", "manifest requires a shapes array");
  ShapeLibrary lib;
  for (std::size_t i = 0; i < j["shapes"].size(); ++i) {
    const auto& js = j["shapes"][i];
    const std::string path = "/shapes/" + std::to_string(i);
    for (const char* key : {"id", "aspect_min", "aspect_max", "outline"})
      if (!js.contains(key))
        throw SchemaViolation(path, std::string("missing key: ") + key);
    Shape s;
    s.id = js["id"].get<std::string>();
    s.aspect_min = js["aspect_min"].get<double>();
    s.aspect_max = js["aspect_max"].get<double>();
    s.outline = js["outline"].get<std::string>();
    if (s.outline == "polygon") {
      if (!js.contains("points"))
        throw SchemaViolation(path, "polygon outline requires points");
      for (const auto& p : js["points"])
        s.polygon.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    lib.shapes.push_back(std::move(s));
  }
  lib.validate();
  return lib;
}

inline ShapeLibrary load_shape_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read shape manifest: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaViolation("/", std::string("malformed JSON: ") + e.what());
  }
  return shape_library_from_json(j);
}

}  // namespace adkit

#pragma once

// Four-stage design pipeline: prompt generation, layout generation,
// background image generation, graphics rendering. The first three stages
// run behind pluggable backends; rendering is always local. Stub backends
// make the whole chain deterministic and modelless.

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adkit/conditioning.hpp"
#include "adkit/error.hpp"
#include "adkit/image.hpp"
#include "adkit/layout.hpp"
#include "adkit/metrics.hpp"
#include "adkit/render.hpp"
#include "adkit/text.hpp"

namespace adkit {

// ---------------------------------------------------------------------------
// Job and request types
// ---------------------------------------------------------------------------

struct StageEndpoint {
  std::string kind = "stub";  // "stub" or "http"
  std::string url;
  int timeout_ms = 15000;
  int retries = 0;
};

struct BackendSelection {
  StageEndpoint prompt;
  StageEndpoint layout;
  StageEndpoint background;
};

struct DesignJob {
  Image foreground;  // RGBA; the alpha channel is the product mask
  std::vector<std::string> taglines;
  int width = 0;
  int height = 0;
  OcclusionClass occlusion;
  std::optional<Image> logo;
  BackendSelection backends;

  void validate(Warnings* warnings = nullptr) const {
    if (width <= 0 || height <= 0)
      throw InvalidInput("design job: target size must be positive");
    if (taglines.empty() && !logo)
      throw InvalidInput("design job: needs at least one tagline or a logo");
    for (const std::string& t : taglines)
      if (t.empty()) throw InvalidInput("design job: empty tagline");
    if (foreground.empty())
      throw InvalidInput("design job: missing foreground image");
    if (alpha_to_mask(foreground).count() == 0)
      throw InvalidInput("design job: foreground alpha region is empty");
    if (taglines.size() > 5)
      warn(warnings, "job carries more than five taglines; layouts degrade "
                     "with crowded canvases");
  }
};

// What the layout stage sees: the canvas, the occlusion condition string,
// the prompts, and the taglines with locations left empty.
struct LayoutRequest {
  CanvasSpec canvas;
  std::string condition;
  PromptPair prompt;
  std::vector<std::string> taglines;
  std::optional<double> logo_ratio;

  void validate() const {
    canvas.validate();
    prompt.validate();
    if (!is_cclp_condition(condition))
      throw InvalidInput("layout request: condition string does not match a "
                         "CCLP template");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["canvas"] = {{"width", canvas.width},
                   {"height", canvas.height},
                   {"canvas_ratio", canvas.canvas_ratio},
                   {"fg_ratio", canvas.fg_ratio},
                   {"class", canvas.occlusion.product_class},
                   {"occlusion", canvas.occlusion.mode == OcclusionMode::NoOcc
                                     ? "no"
                                     : "allow"}};
    if (logo_ratio) j["canvas"]["logo_ratio"] = *logo_ratio;
    j["condition"] = condition;
    j["prompt"] = {{"foreground", prompt.fore}, {"background", prompt.back}};
    j["taglines"] = nlohmann::json::array();
    for (const std::string& t : taglines)
      j["taglines"].push_back({{"content", t}, {"bbox", nullptr}});
    return j;
  }

  static LayoutRequest from_json(const nlohmann::json& j) {
    for (const char* key : {"canvas", "condition", "prompt", "taglines"})
      if (!j.contains(key))
        throw SchemaViolation("/", std::string("missing key: ") + key);
    const auto& jc = j["canvas"];
    LayoutRequest req;
    const std::string occ = jc.at("occlusion").get<std::string>();
    OcclusionClass cls =
        occ == "allow"
            ? OcclusionClass::allow_occ(jc.at("class").get<std::string>())
            : OcclusionClass::no_occ(jc.at("class").get<std::string>());
    std::optional<double> logo;
    if (jc.contains("logo_ratio")) logo = jc["logo_ratio"].get<double>();
    req.canvas = CanvasSpec::make(jc.at("width").get<int>(),
                                  jc.at("height").get<int>(),
                                  jc.at("fg_ratio").get<double>(), cls, logo);
    req.condition = j["condition"].get<std::string>();
    req.prompt = {j["prompt"].at("foreground").get<std::string>(),
                  j["prompt"].at("background").get<std::string>()};
    for (const auto& t : j["taglines"])
      req.taglines.push_back(t.at("content").get<std::string>());
    req.logo_ratio = logo;
    req.validate();
    return req;
  }
};

// ---------------------------------------------------------------------------
// Backend interfaces
// ---------------------------------------------------------------------------

class PromptBackend {
 public:
  virtual ~PromptBackend() = default;
  virtual PromptPair generate(const Image& foreground) = 0;
  virtual std::string name() const = 0;
};

class LayoutBackend {
 public:
  virtual ~LayoutBackend() = default;
  virtual Layout generate(const LayoutRequest& request,
                          Warnings* warnings) = 0;
  virtual std::string name() const = 0;
};

class BackgroundBackend {
 public:
  virtual ~BackgroundBackend() = default;
  virtual Image generate(const PromptPair& prompt, const Layout& layout,
                         const Image& foreground, int width, int height) = 0;
  virtual std::string name() const = 0;
};

struct StageBackends {
  std::shared_ptr<PromptBackend> prompt;
  std::shared_ptr<LayoutBackend> layout;
  std::shared_ptr<BackgroundBackend> background;
};

// ---------------------------------------------------------------------------
// Result
// ---------------------------------------------------------------------------

struct StageFailure {
  std::string stage;  // prompt | layout | background | render
  std::string kind;   // timeout | backend | schema | invalid
  std::string detail;
};

struct DesignResult {
  PromptPair prompt;
  std::optional<Layout> layout;
  std::string layout_json;
  Image background;
  Image final_image;
  std::vector<std::pair<std::string, double>> timings_ms;
  std::optional<LayoutMetrics> metrics;
  Warnings warnings;
  std::optional<StageFailure> failure;

  bool ok() const { return !failure.has_value(); }
};

// ---------------------------------------------------------------------------
// Foreground helpers
// ---------------------------------------------------------------------------

// Aspect ratio of the opaque region of an RGBA image (r1 for the canvas
// spec); falls back to the full frame when alpha is uniform.
inline double foreground_aspect(const Image& img) {
  const Rect b = mask_bounds(alpha_to_mask(img));
  if (b.empty())
    return static_cast<double>(img.width) / std::max(img.height, 1);
  return b.width() / b.height();
}

inline Color mean_foreground_color(const Image& img) {
  std::uint64_t sum[3] = {0, 0, 0};
  std::uint64_t n = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      if (img.alpha(x, y) < 128) continue;
      const Color c = img.pixel(x, y);
      sum[0] += c.r;
      sum[1] += c.g;
      sum[2] += c.b;
      ++n;
    }
  if (n == 0) return {128, 128, 128};
  return {static_cast<int>(sum[0] / n), static_cast<int>(sum[1] / n),
          static_cast<int>(sum[2] / n)};
}

// Crops to the opaque bounds and pastes into the subject box preserving the
// foreground aspect ratio. Returns the pasted pixel rect.
inline Rect paste_foreground(Image& canvas, const Image& foreground,
                             const BBox& subject) {
  Rect fb = mask_bounds(alpha_to_mask(foreground));
  if (fb.empty())
    fb = {0, 0, static_cast<double>(foreground.width),
          static_cast<double>(foreground.height)};
  Image crop;
  crop.width = static_cast<int>(fb.width());
  crop.height = static_cast<int>(fb.height());
  crop.rgba.resize(static_cast<std::size_t>(crop.width) * crop.height * 4);
  for (int y = 0; y < crop.height; ++y)
    for (int x = 0; x < crop.width; ++x) {
      const std::size_t src = foreground.index(
          static_cast<int>(fb.x0) + x, static_cast<int>(fb.y0) + y);
      const std::size_t dst = crop.index(x, y);
      for (int c = 0; c < 4; ++c) crop.rgba[dst + c] = foreground.rgba[src + c];
    }

  const Rect box{subject.left() * canvas.width, subject.top() * canvas.height,
                 subject.right() * canvas.width,
                 subject.bottom() * canvas.height};
  if (box.width() < 1.0 || box.height() < 1.0) return {};
  const double scale =
      std::min(box.width() / crop.width, box.height() / crop.height);
  const int w = std::max(1, static_cast<int>(std::floor(crop.width * scale)));
  const int h = std::max(1, static_cast<int>(std::floor(crop.height * scale)));
  const Image scaled = resize_bilinear(crop, w, h);
  const int ox = static_cast<int>(std::lround(box.x0 + 0.5 * (box.width() - w)));
  const int oy = static_cast<int>(std::lround(box.y0 + 0.5 * (box.height() - h)));
  composite_over(canvas, scaled, ox, oy);
  return {static_cast<double>(ox), static_cast<double>(oy),
          static_cast<double>(ox + w), static_cast<double>(oy + h)};
}

// Canvas-sized subject mask: the foreground alpha scaled into the subject
// box, for content metrics.
inline Mask subject_mask(const Layout& layout, const Image& foreground,
                         int width, int height) {
  Image canvas = Image::solid(width, height, {0, 0, 0}, 0);
  paste_foreground(canvas, foreground, layout.subject.bbox);
  return alpha_to_mask(canvas);
}

// ---------------------------------------------------------------------------
// Rule-based layout generation
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> instance_names_from_prompt(
    const std::string& prompt, std::size_t max_names) {
  static const std::vector<std::string> stop{
      "a", "an", "the", "and", "with", "of", "in", "on",
      "over", "under", "by", "for", "to", "soft", "light"};
  std::vector<std::string> names;
  std::string word;
  auto flush = [&] {
    if (word.size() >= 3 &&
        std::find(stop.begin(), stop.end(), word) == stop.end() &&
        std::find(names.begin(), names.end(), word) == names.end() &&
        names.size() < max_names)
      names.push_back(word);
    word.clear();
  };
  for (char c : prompt) {
    if (std::isalpha(static_cast<unsigned char>(c)))
      word.push_back(static_cast<char>(std::tolower(c)));
    else
      flush();
  }
  flush();
  return names;
}

}  // namespace detail

// Deterministic layout following fixed aesthetic rules: subject anchored at
// (0.5, 0.62) with RKBR width, taglines stacked from y = 0.06 with one
// underlay each, logo top-left, nongraphic objects in the lower band.
// Taglines that do not fit above the subject move to the band below it and
// raise an overflow warning.
inline Layout rule_based_layout(const LayoutRequest& req,
                                Warnings* warnings = nullptr) {
  req.validate();
  const CanvasSpec& spec = req.canvas;
  const double r2 = spec.canvas_ratio;

  // Subject: cap the height so the RKBR width never clamps, keeping the
  // decoded ratio exact.
  const bool no_occ = spec.occlusion.mode == OcclusionMode::NoOcc;
  double subject_h = no_occ ? 0.45 : 0.55;
  subject_h = std::min(subject_h, 0.95 * r2 / spec.fg_ratio);
  const Element subject =
      Element::subject(rkbr_encode(0.5, 0.62, subject_h, spec, warnings));
  const double subject_top = subject.bbox.top();
  const double subject_bottom = subject.bbox.bottom();

  std::vector<Element> graphic;

  // Logo in the top-left corner, RKBR-style width from its own ratio.
  if (req.logo_ratio) {
    const double lh = 0.06;
    const double lw = std::min(0.9, lh * *req.logo_ratio / r2);
    graphic.push_back(Element::logo({0.03 + lw / 2, 0.03 + lh / 2, lw, lh}));
  }

  // Tagline stack. Each tagline gets an underlay inflated 0.01 per side;
  // the first line is the headline and slightly taller.
  auto tagline_width = [&](const std::string& text, double h) {
    const double cps = static_cast<double>(utf8_codepoints(text).size());
    return std::clamp(0.55 * h * cps / r2, 0.05, 0.9);
  };
  double cursor = 0.06;
  std::vector<std::string> overflow;
  for (std::size_t i = 0; i < req.taglines.size(); ++i) {
    const double h = i == 0 ? 0.075 : 0.055;
    const double underlay_bottom = cursor + h + 0.02;
    if (underlay_bottom > subject_top - 0.005) {
      overflow.assign(req.taglines.begin() + static_cast<long>(i),
                      req.taglines.end());
      break;
    }
    const double cy = cursor + 0.01 + h / 2;
    const double w = tagline_width(req.taglines[i], h);
    graphic.push_back(Element::tagline(req.taglines[i], {0.5, cy, w, h}));
    graphic.push_back(Element::underlay({0.5, cy, w + 0.02, h + 0.02}));
    cursor = underlay_bottom + 0.02;
  }
  if (!overflow.empty()) {
    warn(warnings, "rule_based_layout: " + std::to_string(overflow.size()) +
                       " tagline(s) did not fit above the subject; placed in "
                       "the bottom band");
    double bottom_cursor = subject_bottom + 0.02;
    for (const std::string& text : overflow) {
      const double h = 0.05;
      double cy = bottom_cursor + 0.01 + h / 2;
      const double max_cy = 1.0 - 0.005 - (h + 0.02) / 2;
      cy = std::min(cy, max_cy);
      const double w = tagline_width(text, h);
      graphic.push_back(Element::tagline(text, {0.5, cy, w, h}));
      graphic.push_back(Element::underlay({0.5, cy, w + 0.02, h + 0.02}));
      bottom_cursor += h + 0.04;
    }
  }

  // Nongraphic props from the background prompt go into the lower band,
  // dodging any overflow taglines.
  std::vector<Element> nongraphic;
  const auto names = detail::instance_names_from_prompt(req.prompt.back, 2);
  if (!names.empty()) {
    const double band_top = subject_bottom + 0.02;
    const double band_h = 0.98 - band_top;
    if (band_h > 0.04) {
      const double h = std::min(0.12, band_h * 0.6);
      const double w = 0.22;
      auto collides = [&](const BBox& b) {
        for (const Element& e : graphic) {
          if (e.kind != ElementKind::Tagline && e.kind != ElementKind::Underlay)
            continue;
          if (!intersect(b.rect(), e.bbox.rect()).empty()) return true;
        }
        return false;
      };
      for (std::size_t i = 0; i < names.size(); ++i) {
        const double cx = names.size() == 1 ? 0.5 : (i == 0 ? 0.28 : 0.72);
        bool placed = false;
        for (double cy = band_top + h / 2; cy <= 0.98 - h / 2; cy += 0.01) {
          const BBox b{cx, cy, w, h};
          if (!collides(b)) {
            nongraphic.push_back(Element::nongraphic(names[i], b));
            placed = true;
            break;
          }
        }
        if (!placed)
          warn(warnings, "rule_based_layout: no room for nongraphic element "
                         + names[i]);
      }
    }
  }

  return make_layout(subject, std::move(nongraphic), std::move(graphic));
}

// ---------------------------------------------------------------------------
// Stub backends
// ---------------------------------------------------------------------------

class StubPromptBackend final : public PromptBackend {
 public:
  PromptPair generate(const Image& foreground) override {
    const Color tone = mean_foreground_color(foreground);
    const std::string rgb = std::to_string(tone.r) + " " +
                            std::to_string(tone.g) + " " +
                            std::to_string(tone.b);
    return {"studio product photo, dominant tone rgb " + rgb,
            "minimal gradient backdrop, gentle shadow, palette rgb " + rgb};
  }
  std::string name() const override { return "stub"; }
};

class RuleBasedLayoutBackend final : public LayoutBackend {
 public:
  Layout generate(const LayoutRequest& request, Warnings* warnings) override {
    return rule_based_layout(request, warnings);
  }
  std::string name() const override { return "rule-based"; }
};

// Deterministic background: a two-color vertical gradient seeded by the
// background prompt, soft elliptical blobs for the nongraphic elements, and
// the foreground pasted into the subject box.
inline Image stub_background(const PromptPair& prompt, const Layout& layout,
                             const Image& foreground, int width, int height) {
  std::uint64_t state = fnv1a64(prompt.back);
  auto channel = [&](int lo, int hi) {
    return lo + static_cast<int>(splitmix64(state) %
                                 static_cast<std::uint64_t>(hi - lo + 1));
  };
  const Color top{channel(60, 210), channel(60, 210), channel(60, 210)};
  const Color bottom{channel(40, 190), channel(40, 190), channel(40, 190)};

  Image img;
  img.width = width;
  img.height = height;
  img.rgba.resize(static_cast<std::size_t>(width) * height * 4);
  for (int y = 0; y < height; ++y) {
    const double t = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
    const Color row = {static_cast<int>(std::lround(top.r + t * (bottom.r - top.r))),
                       static_cast<int>(std::lround(top.g + t * (bottom.g - top.g))),
                       static_cast<int>(std::lround(top.b + t * (bottom.b - top.b)))};
    for (int x = 0; x < width; ++x) img.set_pixel(x, y, row);
  }

  for (const Element& e : layout.nongraphic) {
    std::uint64_t s = fnv1a64(e.name);
    auto ch = [&] {
      return 50 + static_cast<int>(splitmix64(s) % 180ull);
    };
    const Color blob{ch(), ch(), ch()};
    const PixelRect pr = pixel_rect(e.bbox.clipped(), width, height);
    const Rect box{e.bbox.left() * width, e.bbox.top() * height,
                   e.bbox.right() * width, e.bbox.bottom() * height};
    if (pr.empty() || box.empty()) continue;
    for (int y = pr.ys.begin; y < pr.ys.end; ++y)
      for (int x = pr.xs.begin; x < pr.xs.end; ++x) {
        const double u = 2.0 * (x + 0.5 - box.x0) / box.width() - 1.0;
        const double v = 2.0 * (y + 0.5 - box.y0) / box.height() - 1.0;
        const double rho2 = u * u + v * v;
        if (rho2 >= 1.0) continue;
        const double a = 0.45 * (1.0 - rho2);
        const Color base = img.pixel(x, y);
        img.set_pixel(x, y,
                      {static_cast<int>(std::lround(base.r + a * (blob.r - base.r))),
                       static_cast<int>(std::lround(base.g + a * (blob.g - base.g))),
                       static_cast<int>(std::lround(base.b + a * (blob.b - base.b)))});
      }
  }

  paste_foreground(img, foreground, layout.subject.bbox);
  return img;
}

class StubBackgroundBackend final : public BackgroundBackend {
 public:
  Image generate(const PromptPair& prompt, const Layout& layout,
                 const Image& foreground, int width, int height) override {
    return stub_background(prompt, layout, foreground, width, height);
  }
  std::string name() const override { return "stub"; }
};

inline StageBackends stub_backends() {
  return {std::make_shared<StubPromptBackend>(),
          std::make_shared<RuleBasedLayoutBackend>(),
          std::make_shared<StubBackgroundBackend>()};
}

// ---------------------------------------------------------------------------
// Defaults for the rendering stage
// ---------------------------------------------------------------------------

inline const std::vector<Color>& default_palette() {
  static const std::vector<Color> palette{
      {255, 255, 255}, {20, 20, 24},  {235, 225, 200},
      {180, 30, 40},   {25, 60, 110}, {230, 180, 60}};
  return palette;
}

inline const std::vector<FontMetrics>& default_fonts() {
  static const std::vector<FontMetrics> fonts{{"display", 0.75, 1.25},
                                              {"body", 0.75, 1.25}};
  return fonts;
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

// Runs the four stages strictly in order, validating every intermediate
// before the next stage sees it. On failure the result names the stage and
// keeps everything produced so far.
inline DesignResult run_design(const DesignJob& job,
                               const StageBackends& backends,
                               const StyleConfig& style_cfg = {}) {
  DesignResult result;
  using clock = std::chrono::steady_clock;
  auto timed = [&result](const std::string& stage, auto&& fn) {
    const auto t0 = clock::now();
    fn();
    const auto t1 = clock::now();
    result.timings_ms.emplace_back(
        stage, std::chrono::duration<double, std::milli>(t1 - t0).count());
  };
  auto fail = [&result](const std::string& stage, const std::string& kind,
                        const std::string& detail) {
    result.failure = StageFailure{stage, kind, detail};
  };

  try {
    job.validate(&result.warnings);
  } catch (const Error& e) {
    fail("validate", "invalid", e.what());
    return result;
  }
  if (!backends.prompt || !backends.layout || !backends.background) {
    fail("validate", "invalid", "incomplete backend set");
    return result;
  }

  // Stage 1: prompt generation.
  try {
    timed("prompt", [&] {
      result.prompt = backends.prompt->generate(job.foreground);
      result.prompt.validate();
    });
  } catch (const BackendTimeout& e) {
    fail("prompt", "timeout", e.what());
    return result;
  } catch (const BackendError& e) {
    fail("prompt", "backend", e.what());
    return result;
  } catch (const Error& e) {
    fail("prompt", "schema", e.what());
    return result;
  }

  // Stage 2: layout generation.
  LayoutRequest request;
  try {
    request.canvas = CanvasSpec::make(
        job.width, job.height, foreground_aspect(job.foreground),
        job.occlusion,
        job.logo ? std::optional<double>(foreground_aspect(*job.logo))
                 : std::nullopt);
    request.condition = cclp_condition(job.occlusion);
    request.prompt = result.prompt;
    request.taglines = job.taglines;
    request.logo_ratio = request.canvas.logo_ratio;
    request.validate();
  } catch (const Error& e) {
    fail("layout", "invalid", e.what());
    return result;
  }
  try {
    timed("layout", [&] {
      Layout layout = backends.layout->generate(request, &result.warnings);
      validate_layout(layout);
      if (tagline_count(layout) != job.taglines.size())
        throw SchemaViolation(
            "/graphic", "layout has " + std::to_string(tagline_count(layout)) +
                            " tagline boxes for " +
                            std::to_string(job.taglines.size()) + " inputs");
      if (job.logo) {
        bool has_logo = false;
        for (const Element& e : layout.graphic)
          has_logo = has_logo || e.kind == ElementKind::Logo;
        if (!has_logo)
          warn(&result.warnings, "layout omitted the requested logo element");
      }
      result.layout = std::move(layout);
      result.layout_json = serialize_layout(*result.layout);
    });
  } catch (const BackendTimeout& e) {
    fail("layout", "timeout", e.what());
    return result;
  } catch (const BackendError& e) {
    fail("layout", "backend", e.what());
    return result;
  } catch (const Error& e) {
    fail("layout", "schema", e.what());
    return result;
  }

  // Stage 3: background image generation.
  try {
    timed("background", [&] {
      result.background = backends.background->generate(
          result.prompt, *result.layout, job.foreground, job.width, job.height);
      if (result.background.width != job.width ||
          result.background.height != job.height)
        throw SchemaViolation("/", "background has wrong dimensions");
    });
  } catch (const BackendTimeout& e) {
    fail("background", "timeout", e.what());
    return result;
  } catch (const BackendError& e) {
    fail("background", "backend", e.what());
    return result;
  } catch (const Error& e) {
    fail("background", "schema", e.what());
    return result;
  }

  // Stage 4: graphics rendering (always local).
  try {
    timed("render", [&] {
      const StyleAssignment styles = assign_styles(
          *result.layout, mean_foreground_color(job.foreground),
          result.background, default_fonts(), default_palette(),
          ShapeLibrary::builtin(), style_cfg, &result.warnings);
      result.final_image =
          render(*result.layout, result.background, styles,
                 job.logo ? &*job.logo : nullptr, style_cfg, &result.warnings);
    });
  } catch (const Error& e) {
    fail("render", "invalid", e.what());
    return result;
  }

  const Mask mask =
      subject_mask(*result.layout, job.foreground, job.width, job.height);
  result.metrics = compute_layout_metrics(
      *result.layout, SubjectRegion::from_mask(mask), &result.background,
      &result.warnings);
  return result;
}

}  // namespace adkit

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <thread>

#include "adkit/http_backend.hpp"
#include "adkit/pipeline.hpp"
#include "adkit/raster_oracle.hpp"
#include "helpers.hpp"

using namespace adkit;
using Catch::Approx;

namespace {

// A small product image: opaque rounded blob over a transparent frame.
Image make_foreground(int w, int h, Color tone) {
  Image img = Image::solid(w, h, {0, 0, 0}, 0);
  const double cx = w / 2.0, cy = h / 2.0;
  const double rx = w * 0.4, ry = h * 0.45;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double u = (x + 0.5 - cx) / rx;
      const double v = (y + 0.5 - cy) / ry;
      if (u * u + v * v <= 1.0) img.set_pixel(x, y, tone);
    }
  return img;
}

DesignJob make_job(std::vector<std::string> taglines,
                   OcclusionClass occ = OcclusionClass::no_occ("vacuum"),
                   int w = 256, int h = 320) {
  DesignJob job;
  job.foreground = make_foreground(120, 150, {180, 60, 40});
  job.taglines = std::move(taglines);
  job.width = w;
  job.height = h;
  job.occlusion = std::move(occ);
  return job;
}

LayoutRequest make_request(std::vector<std::string> taglines,
                           OcclusionClass occ = OcclusionClass::no_occ("vacuum"),
                           int w = 684, int h = 1000, double r1 = 0.8) {
  LayoutRequest req;
  req.canvas = CanvasSpec::make(w, h, r1, occ);
  req.condition = cclp_condition(occ);
  req.prompt = {"studio shot of a vacuum", "pale gradient backdrop, plant"};
  req.taglines = std::move(taglines);
  return req;
}

}  // namespace

TEST_CASE("rule_based_layout guarantees") {
  std::mt19937 rng(60601);
  std::uniform_real_distribution<double> ratio(0.4, 2.2);
  std::uniform_int_distribution<int> n_tag(1, 4);
  std::uniform_int_distribution<int> words(1, 4);
  std::uniform_int_distribution<int> side(300, 1400);

  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> tags;
    const int n = n_tag(rng);
    for (int i = 0; i < n; ++i)
      tags.push_back(testutil::random_sentence(rng, words(rng)));
    const auto req = make_request(tags, OcclusionClass::no_occ("vacuum"),
                                  side(rng), side(rng), ratio(rng));
    Warnings w;
    const Layout l = rule_based_layout(req, &w);

    // TMR: one tagline box per input.
    REQUIRE(tagline_count(l) == tags.size());
    // Val = 1.
    REQUIRE(validity(l) == 1.0);
    // Occ = 0 against the subject bbox.
    REQUIRE(occlusion(l, SubjectRegion::from_bbox(l.subject.bbox)) == 0.0);
    // FRC: the subject decodes to r1 exactly.
    REQUIRE(rkbr_decode_ratio(l.subject.bbox, req.canvas) ==
            Approx(req.canvas.fg_ratio).margin(1e-9));
    // Taglines and underlays share the x-center, so each contributes zero
    // to alignment on the x-center axis.
    for (const Element& e : l.graphic)
      if (e.kind != ElementKind::Logo)
        REQUIRE(e.bbox.x == Approx(0.5).margin(1e-12));
  }
}

TEST_CASE("rule_based_layout details") {
  SECTION("subject anchor and occlusion-dependent height") {
    const auto no_occ = make_request({"sale"});
    const Layout a = rule_based_layout(no_occ);
    CHECK(a.subject.bbox.x == 0.5);
    CHECK(a.subject.bbox.y == Approx(0.62));
    CHECK(a.subject.bbox.h == Approx(0.45));

    const auto allow = make_request({"sale"}, OcclusionClass::allow_occ("dress"));
    const Layout b = rule_based_layout(allow);
    CHECK(b.subject.bbox.h == Approx(0.55));
  }

  SECTION("subject height shrinks instead of clamping the width") {
    // r1/r2 large enough that 0.45 * r1/r2 would exceed 1.
    const auto req = make_request({"sale"}, OcclusionClass::no_occ("tv"),
                                  500, 1000, 2.5);
    Warnings w;
    const Layout l = rule_based_layout(req, &w);
    CHECK(l.subject.bbox.w <= 0.95 + 1e-12);
    CHECK(rkbr_decode_ratio(l.subject.bbox, req.canvas) ==
          Approx(2.5).margin(1e-9));
  }

  SECTION("one underlay per tagline, inflated 0.01 per side") {
    const Layout l = rule_based_layout(make_request({"big sale", "today"}));
    std::vector<const Element*> tags, unders;
    for (const Element& e : l.graphic) {
      if (e.kind == ElementKind::Tagline) tags.push_back(&e);
      if (e.kind == ElementKind::Underlay) unders.push_back(&e);
    }
    REQUIRE(tags.size() == 2);
    REQUIRE(unders.size() == 2);
    for (std::size_t i = 0; i < tags.size(); ++i) {
      CHECK(unders[i]->bbox.x == Approx(tags[i]->bbox.x));
      CHECK(unders[i]->bbox.y == Approx(tags[i]->bbox.y));
      CHECK(unders[i]->bbox.w == Approx(tags[i]->bbox.w + 0.02));
      CHECK(unders[i]->bbox.h == Approx(tags[i]->bbox.h + 0.02));
      CHECK(unders[i]->bbox.rect().contains(tags[i]->bbox.rect()));
    }
    const auto scores = underlay_scores(l);
    CHECK(*scores.und_s == 1.0);
  }

  SECTION("taglines stack from y = 0.06 with 0.02 gaps") {
    const Layout l = rule_based_layout(make_request({"one", "two"}));
    std::vector<const Element*> unders;
    for (const Element& e : l.graphic)
      if (e.kind == ElementKind::Underlay) unders.push_back(&e);
    REQUIRE(unders.size() == 2);
    CHECK(unders[0]->bbox.top() == Approx(0.06));
    CHECK(unders[1]->bbox.top() ==
          Approx(unders[0]->bbox.bottom() + 0.02));
  }

  SECTION("logo goes top-left with its own keep-ratio width") {
    auto req = make_request({"sale"});
    req.logo_ratio = 3.0;
    req.canvas = CanvasSpec::make(684, 1000, 0.8,
                                  OcclusionClass::no_occ("vacuum"), 3.0);
    const Layout l = rule_based_layout(req);
    const Element* logo = nullptr;
    for (const Element& e : l.graphic)
      if (e.kind == ElementKind::Logo) logo = &e;
    REQUIRE(logo);
    CHECK(logo->bbox.left() == Approx(0.03));
    CHECK(logo->bbox.top() == Approx(0.03));
    CHECK(logo->bbox.w == Approx(0.06 * 3.0 / 0.684));
  }

  SECTION("overflow taglines land in the bottom band with a warning") {
    std::vector<std::string> many;
    for (int i = 0; i < 7; ++i) many.push_back("line " + std::to_string(i));
    const auto req = make_request(many);
    Warnings w;
    const Layout l = rule_based_layout(req, &w);
    CHECK(tagline_count(l) == many.size());
    CHECK(w.contains("did not fit above the subject"));
    // Still zero subject occlusion: the band starts below the subject.
    CHECK(occlusion(l, SubjectRegion::from_bbox(l.subject.bbox)) == 0.0);
  }

  SECTION("nongraphic props avoid taglines") {
    const auto req = make_request({"fresh air"});
    const Layout l = rule_based_layout(req);
    CHECK(!l.nongraphic.empty());
    for (const Element& ng : l.nongraphic)
      for (const Element& g : l.graphic)
        if (g.kind == ElementKind::Tagline)
          CHECK(intersect(ng.bbox.rect(), g.bbox.rect()).empty());
  }
}

TEST_CASE("stub background") {
  const auto req = make_request({"sale"});
  const Layout layout = rule_based_layout(req);
  const Image fg = make_foreground(100, 125, {200, 80, 50});
  const PromptPair prompt{"fore", "pale gradient backdrop"};

  SECTION("deterministic") {
    const Image a = stub_background(prompt, layout, fg, 342, 500);
    const Image b = stub_background(prompt, layout, fg, 342, 500);
    CHECK(a == b);
  }

  SECTION("different background prompts give different gradients") {
    const Image a = stub_background({"f", "prompt one"}, layout, fg, 128, 160);
    const Image b = stub_background({"f", "prompt two"}, layout, fg, 128, 160);
    CHECK(a != b);
  }

  SECTION("pasted foreground keeps its aspect ratio within a pixel") {
    Image canvas = Image::solid(342, 500, {0, 0, 0});
    const Rect pasted = paste_foreground(canvas, fg, layout.subject.bbox);
    REQUIRE(!pasted.empty());
    const double fg_aspect = foreground_aspect(fg);
    const double pasted_aspect = pasted.width() / pasted.height();
    // Within one pixel of the exact ratio in either direction.
    CHECK(std::abs(pasted.width() - fg_aspect * pasted.height()) <= 1.0 + 1e-9);
    CHECK(pasted_aspect == Approx(fg_aspect).margin(0.02));
  }
}

TEST_CASE("run_design with stub backends") {
  SECTION("single tagline job produces a valid result") {
    const DesignJob job = make_job({"limited offer"});
    const DesignResult res = run_design(job, stub_backends());
    REQUIRE(res.ok());
    REQUIRE(res.layout);
    CHECK(tagline_count(*res.layout) == 1);
    CHECK(res.final_image.width == job.width);
    CHECK(res.final_image.height == job.height);
    CHECK(res.timings_ms.size() == 4);
    CHECK(res.metrics.has_value());
    // The layout JSON intermediate round-trips.
    const Layout parsed = parse_layout(res.layout_json);
    CHECK(parsed == *res.layout);
  }

  SECTION("deterministic end to end") {
    const DesignJob job = make_job({"two for one", "this week"});
    const DesignResult a = run_design(job, stub_backends());
    const DesignResult b = run_design(job, stub_backends());
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(a.final_image == b.final_image);
    CHECK(a.layout_json == b.layout_json);
    CHECK(a.prompt == b.prompt);
  }

  SECTION("tagline count mismatch is a layout schema failure") {
    class DropTagline final : public LayoutBackend {
     public:
      Layout generate(const LayoutRequest& req, Warnings* w) override {
        LayoutRequest fewer = req;
        fewer.taglines.pop_back();
        return rule_based_layout(fewer, w);
      }
      std::string name() const override { return "drop"; }
    };
    StageBackends backends = stub_backends();
    backends.layout = std::make_shared<DropTagline>();
    const DesignResult res = run_design(make_job({"a", "b"}), backends);
    REQUIRE_FALSE(res.ok());
    CHECK(res.failure->stage == "layout");
    CHECK(res.failure->kind == "schema");
    // Intermediates from earlier stages survive.
    CHECK_FALSE(res.prompt.fore.empty());
  }

  SECTION("background failure preserves the layout intermediate") {
    class Boom final : public BackgroundBackend {
     public:
      Image generate(const PromptPair&, const Layout&, const Image&, int,
                     int) override {
        throw BackendError("background", "boom");
      }
      std::string name() const override { return "boom"; }
    };
    StageBackends backends = stub_backends();
    backends.background = std::make_shared<Boom>();
    const DesignResult res = run_design(make_job({"a"}), backends);
    REQUIRE_FALSE(res.ok());
    CHECK(res.failure->stage == "background");
    CHECK(res.failure->kind == "backend");
    CHECK(res.layout.has_value());
    CHECK_FALSE(res.layout_json.empty());
  }

  SECTION("job validation failures") {
    DesignJob no_content = make_job({});
    const DesignResult res = run_design(no_content, stub_backends());
    REQUIRE_FALSE(res.ok());
    CHECK(res.failure->stage == "validate");

    DesignJob job = make_job({"x"});
    job.width = 0;
    CHECK_FALSE(run_design(job, stub_backends()).ok());
  }

  SECTION("more than five taglines warns but succeeds") {
    const DesignJob job =
        make_job({"a", "b", "c", "d", "e", "f"}, OcclusionClass::no_occ("v"),
                 256, 400);
    const DesignResult res = run_design(job, stub_backends());
    REQUIRE(res.ok());
    CHECK(res.warnings.contains("more than five taglines"));
  }

  SECTION("logo job pastes the logo") {
    DesignJob job = make_job({"brand new"});
    job.logo = Image::solid(40, 20, {10, 200, 10});
    const DesignResult res = run_design(job, stub_backends());
    REQUIRE(res.ok());
    bool has_logo = false;
    for (const Element& e : res.layout->graphic)
      has_logo = has_logo || e.kind == ElementKind::Logo;
    CHECK(has_logo);
  }
}

TEST_CASE("http backends against a mock server") {
  httplib::Server server;
  const auto fixture_req = make_request({"hello"});
  const Layout fixture_layout = rule_based_layout(fixture_req);

  server.Post("/prompt", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"foreground":"a product","background":"a backdrop"})",
                    "application/json");
  });
  server.Post("/layout",
              [&](const httplib::Request& req, httplib::Response& res) {
                // Echo a fixture layout regardless of the request, but
                // require the request to be a valid LayoutRequest.
                LayoutRequest::from_json(nlohmann::json::parse(req.body));
                res.set_content(serialize_layout(fixture_layout),
                                "application/json");
              });
  server.Post("/layout500", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("backend exploded", "text/plain");
  });
  server.Post("/layout_oob",
              [&](const httplib::Request&, httplib::Response& res) {
                nlohmann::json j = layout_to_json(fixture_layout);
                j["graphic"][0]["bbox"][0] = 1.4;  // out of range
                res.set_content(j.dump(), "application/json");
              });
  server.Post("/background",
              [](const httplib::Request& req, httplib::Response& res) {
                REQUIRE(req.is_multipart_form_data());
                const auto& prompt = req.get_file_value("prompt");
                const auto& layout = req.get_file_value("layout");
                const auto& fg = req.get_file_value("foreground");
                REQUIRE_FALSE(prompt.content.empty());
                REQUIRE_FALSE(layout.content.empty());
                const nlohmann::json pj = nlohmann::json::parse(prompt.content);
                const Image fg_img = decode_png(
                    reinterpret_cast<const std::uint8_t*>(fg.content.data()),
                    fg.content.size());
                const Layout l = parse_layout(layout.content);
                const Image img =
                    stub_background({pj["foreground"], pj["background"]}, l,
                                    fg_img, pj["width"], pj["height"]);
                const auto png = encode_png(img);
                res.set_content(std::string(png.begin(), png.end()),
                                "image/png");
              });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string url = "http://127.0.0.1:" + std::to_string(port);

  SECTION("prompt round trip") {
    HttpPromptBackend backend({"http", url, 3000, 0});
    const PromptPair p = backend.generate(make_foreground(50, 50, {1, 2, 3}));
    CHECK(p.fore == "a product");
    CHECK(p.back == "a backdrop");
  }

  SECTION("layout echo returns the fixture layout") {
    HttpLayoutBackend backend({"http", url, 3000, 0});
    Warnings w;
    const Layout l = backend.generate(fixture_req, &w);
    CHECK(l == fixture_layout);
  }

  SECTION("HTTP 500 becomes BackendError") {
    StageEndpoint ep{"http", url, 3000, 0};
    HttpLayoutBackend backend(ep);
    // Point the client at the 500 route via a path-rewriting endpoint: use
    // a server-side alias instead.
    httplib::Client probe(url);
    auto res = probe.Post("/layout500", "{}", "application/json");
    REQUIRE(res);
    CHECK(res->status == 500);

    // Directly exercise the error mapping through a raw call.
    bool threw = false;
    try {
      auto r = detail::post_with_retries(ep, "layout", "/layout500", {}, "{}",
                                         "application/json");
      detail::require_status_ok(r, "layout");
    } catch (const BackendError& e) {
      threw = true;
      CHECK(std::string(e.what()).find("500") != std::string::npos);
      CHECK(e.stage() == "layout");
    }
    CHECK(threw);
  }

  SECTION("out-of-range bbox from the model is clamped with a warning") {
    StageEndpoint ep{"http", url, 3000, 0};
    Warnings w;
    auto res = detail::post_with_retries(ep, "layout", "/layout_oob", {},
                                         fixture_req.to_json().dump(),
                                         "application/json");
    detail::require_status_ok(res, "layout");
    const Layout l = parse_layout(res->body, {.clamp_out_of_range = true}, &w);
    CHECK(w.contains("clamped"));
    for (const Element& e : l.graphic) CHECK(e.bbox.in_range());
  }

  SECTION("full pipeline over HTTP backends") {
    BackendSelection sel;
    sel.prompt = {"http", url, 3000, 0};
    sel.layout = {"stub", "", 3000, 0};
    sel.background = {"http", url, 3000, 0};
    DesignJob job = make_job({"hello"});
    job.backends = sel;
    const DesignResult res = run_design(job, make_backends(sel));
    REQUIRE(res.ok());
    CHECK(res.prompt.fore == "a product");
    CHECK(res.final_image.width == job.width);
  }

  SECTION("unreachable host maps to BackendError") {
    HttpPromptBackend backend({"http", "http://127.0.0.1:1", 200, 0});
    CHECK_THROWS_AS(backend.generate(make_foreground(20, 20, {0, 0, 0})),
                    BackendError);
  }

  server.stop();
  server_thread.join();
}

TEST_CASE("layout request wire format") {
  auto req = make_request({"alpha", "beta"});
  req.logo_ratio = 2.0;
  req.canvas = CanvasSpec::make(684, 1000, 0.8,
                                OcclusionClass::no_occ("vacuum"), 2.0);
  const nlohmann::json j = req.to_json();
  CHECK(j["taglines"].size() == 2);
  CHECK(j["taglines"][0]["bbox"].is_null());  // empty locations to fill in
  CHECK(j["condition"] == cclp_condition(OcclusionClass::no_occ("vacuum")));

  const LayoutRequest back = LayoutRequest::from_json(j);
  CHECK(back.taglines == req.taglines);
  CHECK(back.condition == req.condition);
  CHECK(back.canvas.fg_ratio == Approx(0.8));
  CHECK(back.logo_ratio == req.logo_ratio);

  SECTION("non-template condition strings are rejected") {
    LayoutRequest bad = req;
    bad.condition = "please avoid the subject";
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
  }
}

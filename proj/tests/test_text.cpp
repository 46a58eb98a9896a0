#include <catch2/catch_amalgamated.hpp>

#include "adkit/text.hpp"

using namespace adkit;
using Catch::Approx;

namespace {
// Unit-advance fixture: width of k codepoints at size s is exactly k*s and
// a line is exactly s tall, so optima are hand-computable.
const FontMetrics kUnitFont{"unit", 1.0, 1.0};
}  // namespace

TEST_CASE("utf8 codepoint iteration") {
  CHECK(utf8_codepoints("abc").size() == 3);
  CHECK(utf8_codepoints("h\xc3\xa9llo").size() == 5);           // héllo
  CHECK(utf8_codepoints("\xe5\xb9\xbf\xe5\x91\x8a").size() == 2);  // CJK pair
  const auto bad = utf8_codepoints("a\x80" "b");
  REQUIRE(bad.size() == 3);
  CHECK(bad[1] == 0xFFFD);
}

TEST_CASE("fit_text scaling law") {
  // Width not binding: the size is exactly the padded height.
  const Rect small{0, 0, 10000, 40};
  const Rect tall{0, 0, 10000, 80};
  const TextFit a = fit_text("abc", small, kUnitFont, 1.0);
  const TextFit b = fit_text("abc", tall, kUnitFont, 1.0);
  CHECK(a.size_px == Approx(36.0).margin(1e-9));  // 0.9 * 40
  CHECK(b.size_px == Approx(2.0 * a.size_px).margin(1e-9));
  CHECK(a.lines.size() == 1);
  CHECK_FALSE(a.overflow);
}

TEST_CASE("fit_text width-binding single line") {
  // 3 codepoints, avail_w = 90: size converges to 30.
  const Rect box{0, 0, 100, 100000};
  const TextFit f = fit_text("abc", box, kUnitFont, 1.0);
  CHECK(f.size_px == Approx(30.0).margin(1e-6));
  CHECK(f.lines.size() == 1);
}

TEST_CASE("fit_text prefers wrapping when it admits a larger size") {
  // "ab cd" in a 100x100 box with the unit font: single line caps the size
  // at 18 (5 cps in 90), wrapping to two lines allows 45.
  const Rect box{0, 0, 100, 100};
  const TextFit f = fit_text("ab cd", box, kUnitFont, 1.0);
  CHECK(f.size_px == Approx(45.0).margin(1e-6));
  REQUIRE(f.lines.size() == 2);
  CHECK(f.lines[0] == "ab");
  CHECK(f.lines[1] == "cd");
}

TEST_CASE("fit_text keeps one line when it fits") {
  const Rect box{0, 0, 1000, 30};
  const TextFit f = fit_text("buy one get one", box, kUnitFont, 1.0);
  CHECK(f.lines.size() == 1);
  CHECK(f.lines[0] == "buy one get one");
}

TEST_CASE("fit_text overflow path") {
  Warnings w;
  const Rect tiny{0, 0, 8, 4};
  const TextFit f = fit_text("hello world", tiny, kUnitFont, 12.0, &w);
  CHECK(f.overflow);
  CHECK(f.size_px == 12.0);
  CHECK_FALSE(f.lines.empty());
  CHECK(w.contains("minimum size"));

  SECTION("degenerate box") {
    Warnings w2;
    const TextFit g = fit_text("x", Rect{0, 0, 0, 0}, kUnitFont, 12.0, &w2);
    CHECK(g.overflow);
    CHECK_FALSE(w2.empty());
  }
}

TEST_CASE("fit_text rejects empty content") {
  CHECK_THROWS_AS(fit_text("", Rect{0, 0, 10, 10}, kUnitFont, 1.0),
                  InvalidInput);
  CHECK_THROWS_AS(fit_text("   ", Rect{0, 0, 10, 10}, kUnitFont, 1.0),
                  InvalidInput);
}

TEST_CASE("draw_text stays inside the clip box") {
  Image img = Image::solid(100, 60, {0, 0, 0});
  const Rect box{20, 10, 80, 50};
  const FontMetrics font;  // builtin
  const TextFit fit = fit_text("SALE", box, font, 4.0);
  draw_text(img, fit, box, font, {255, 255, 255});

  std::size_t inked = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const bool white = img.pixel(x, y) == Color{255, 255, 255};
      inked += white;
      if (white) {
        const double cx = x + 0.5, cy = y + 0.5;
        REQUIRE(cx >= box.x0);
        REQUIRE(cx < box.x1);
        REQUIRE(cy >= box.y0);
        REQUIRE(cy < box.y1);
      }
    }
  CHECK(inked > 0);
}

TEST_CASE("draw_text is deterministic") {
  const Rect box{5, 5, 95, 35};
  const FontMetrics font;
  const TextFit fit = fit_text("two runs", box, font, 4.0);
  Image a = Image::solid(100, 40, {10, 20, 30});
  Image b = Image::solid(100, 40, {10, 20, 30});
  draw_text(a, fit, box, font, {250, 240, 230});
  draw_text(b, fit, box, font, {250, 240, 230});
  CHECK(a == b);
}

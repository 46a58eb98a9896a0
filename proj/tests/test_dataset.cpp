#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "adkit/dataset.hpp"
#include "adkit/pipeline.hpp"

using namespace adkit;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct FixtureDir {
  fs::path root;

  explicit FixtureDir(const std::string& name) {
    root = fs::temp_directory_path() / ("adkit_" + name);
    fs::remove_all(root);
    fs::create_directories(root / "images");
    fs::create_directories(root / "masks");
    fs::create_directories(root / "records");
  }
  ~FixtureDir() { fs::remove_all(root); }
};

Image gradient_image(int w, int h) {
  Image img = Image::solid(w, h, {0, 0, 0});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set_pixel(x, y, {x * 255 / std::max(1, w - 1),
                           y * 255 / std::max(1, h - 1), 96});
  return img;
}

Image rect_mask(int w, int h, int mw, int mh) {
  Image img = Image::solid(w, h, {0, 0, 0});
  const int x0 = (w - mw) / 2, y0 = (h - mh) / 2;
  for (int y = y0; y < y0 + mh; ++y)
    for (int x = x0; x < x0 + mw; ++x) img.set_pixel(x, y, {255, 255, 255});
  return img;
}

// Writes a complete valid sample; returns the record JSON for tweaking.
nlohmann::json write_sample(const FixtureDir& dir, const std::string& id,
                            int w, int h, int mask_w, int mask_h,
                            const std::vector<std::string>& taglines,
                            const Layout& layout) {
  write_png((dir.root / "images" / (id + ".png")).string(), gradient_image(w, h));
  write_png((dir.root / "masks" / (id + ".png")).string(),
            rect_mask(w, h, mask_w, mask_h));
  nlohmann::json record;
  record["id"] = id;
  record["image"] = "../images/" + id + ".png";
  record["mask"] = "../masks/" + id + ".png";
  record["width"] = w;
  record["height"] = h;
  record["prompt"] = {{"foreground", "a product"}, {"background", "a backdrop"}};
  record["taglines"] = taglines;
  record["layout"] = layout_to_json(layout);
  std::ofstream out(dir.root / "records" / (id + ".json"));
  out << record.dump(2);
  return record;
}

Layout reference_layout(int w, int h, int mask_w, int mask_h,
                        const std::vector<std::string>& taglines) {
  const double r1 = static_cast<double>(mask_w) / mask_h;
  const auto spec = CanvasSpec::make(w, h, r1, OcclusionClass::no_occ("thing"));
  std::vector<Element> graphic;
  double y = 0.08;
  for (const std::string& t : taglines) {
    graphic.push_back(Element::tagline(t, {0.5, y, 0.4, 0.06}));
    y += 0.1;
  }
  return make_layout(Element::subject(rkbr_encode(0.5, 0.62, 0.4, spec)),
                     {Element::nongraphic("plant", {0.2, 0.85, 0.15, 0.12})},
                     std::move(graphic));
}

void write_manifest(const FixtureDir& dir, const std::vector<std::string>& ids) {
  nlohmann::json m;
  m["samples"] = nlohmann::json::array();
  for (const std::string& id : ids)
    m["samples"].push_back("records/" + id + ".json");
  std::ofstream out(dir.root / "manifest.json");
  out << m.dump(2);
}

}  // namespace

TEST_CASE("load_sample accepts a minimal valid record") {
  FixtureDir dir("load_ok");
  const Layout layout = reference_layout(200, 250, 80, 100, {"hello"});
  const auto record = write_sample(dir, "s1", 200, 250, 80, 100, {"hello"}, layout);

  const Sample s = load_sample(record, dir.root / "records");
  CHECK(s.id == "s1");
  CHECK(s.width == 200);
  CHECK(s.taglines.size() == 1);
  CHECK(s.fg_ratio == Approx(0.8));  // 80/100 from the mask bounds
  CHECK(s.layout == layout);

  SECTION("loading is idempotent") {
    const Sample t = load_sample(record, dir.root / "records");
    CHECK(t.layout == s.layout);
    CHECK(t.fg_ratio == s.fg_ratio);
  }

  SECTION("explicit fg_ratio overrides the mask-derived value") {
    nlohmann::json r = record;
    r["fg_ratio"] = 0.5;
    CHECK(load_sample(r, dir.root / "records").fg_ratio == 0.5);
  }
}

TEST_CASE("load_sample rejections") {
  FixtureDir dir("load_bad");
  const Layout layout = reference_layout(128, 128, 60, 60, {"hi"});
  const auto record = write_sample(dir, "s1", 128, 128, 60, 60, {"hi"}, layout);
  const fs::path root = dir.root / "records";

  SECTION("tagline without content names the element index") {
    nlohmann::json r = record;
    r["layout"]["graphic"][0].erase("content");
    try {
      load_sample(r, root);
      FAIL("expected SampleError");
    } catch (const SampleError& e) {
      REQUIRE(e.violations().size() == 1);
      CHECK(e.violations()[0].find("/graphic/0") != std::string::npos);
    }
  }

  SECTION("mask/image size mismatch") {
    write_png((dir.root / "masks" / "s1.png").string(), rect_mask(64, 64, 30, 30));
    try {
      load_sample(record, root);
      FAIL("expected SampleError");
    } catch (const SampleError& e) {
      CHECK(e.violations()[0].find("mask dimensions") != std::string::npos);
    }
  }

  SECTION("missing asset file") {
    nlohmann::json r = record;
    r["image"] = "../images/absent.png";
    CHECK_THROWS_AS(load_sample(r, root), SampleError);
  }

  SECTION("all violations are collected at once") {
    nlohmann::json r = record;
    r["layout"]["graphic"][0].erase("content");
    r["width"] = -5;
    r.erase("prompt");
    try {
      load_sample(r, root);
      FAIL("expected SampleError");
    } catch (const SampleError& e) {
      CHECK(e.violations().size() >= 3);
    }
  }

  SECTION("blank mask cannot define the foreground ratio") {
    write_png((dir.root / "masks" / "s1.png").string(),
              Image::solid(128, 128, {0, 0, 0}));
    try {
      load_sample(record, root);
      FAIL("expected SampleError");
    } catch (const SampleError& e) {
      CHECK(e.violations()[0].find("no foreground pixels") != std::string::npos);
    }
  }
}

TEST_CASE("dataset stats") {
  SECTION("empty set") {
    const DatasetStats s = dataset_stats({});
    CHECK(s.sample_count == 0);
    CHECK(s.aspect_histogram.empty());
  }

  SECTION("the four canonical aspect ratios populate four buckets") {
    FixtureDir dir("stats");
    // width/height pairs at ratios 0.684, 1.0, 0.667, 0.75.
    const std::vector<std::pair<int, int>> sizes{
        {171, 250}, {200, 200}, {166, 249}, {150, 200}};
    std::vector<Sample> samples;
    int i = 0;
    for (auto [w, h] : sizes) {
      const std::string id = "s" + std::to_string(i++);
      const Layout l = reference_layout(w, h, w / 2, h / 2, {"t"});
      const auto rec = write_sample(dir, id, w, h, w / 2, h / 2, {"t"}, l);
      samples.push_back(load_sample(rec, dir.root / "records"));
    }
    const DatasetStats s = dataset_stats(samples);
    CHECK(s.sample_count == 4);
    CHECK(s.aspect_histogram.size() == 4);
    std::size_t total = 0;
    for (const auto& [ratio, count] : s.aspect_histogram) total += count;
    CHECK(total == s.sample_count);
    CHECK(s.element_counts.at("subject") == 4);
    CHECK(s.element_counts.at("tagline") == 4);
    CHECK(s.element_counts.at("nongraphic") == 4);
  }

  SECTION("many-tagline samples land in the tail of the distribution") {
    FixtureDir dir("stats_tail");
    std::vector<std::string> many{"a", "b", "c", "d", "e", "f"};
    const Layout l = reference_layout(200, 200, 100, 100, many);
    const auto rec = write_sample(dir, "s0", 200, 200, 100, 100, many, l);
    const Sample s = load_sample(rec, dir.root / "records");
    const DatasetStats stats = dataset_stats({s});
    CHECK(stats.tagline_count_histogram.at(6) == 1);
  }
}

TEST_CASE("manifest loading") {
  FixtureDir dir("manifest");
  const Layout l1 = reference_layout(100, 125, 40, 50, {"one"});
  write_sample(dir, "good", 100, 125, 40, 50, {"one"}, l1);
  // Broken record: nonexistent image.
  nlohmann::json bad = write_sample(dir, "bad", 100, 125, 40, 50, {"one"}, l1);
  bad["image"] = "../images/nope.png";
  {
    std::ofstream out(dir.root / "records" / "bad.json");
    out << bad.dump(2);
  }
  write_manifest(dir, {"good", "bad"});

  const ManifestLoad load = load_manifest(dir.root / "manifest.json");
  CHECK(load.samples.size() == 1);
  REQUIRE(load.rejections.size() == 1);
  CHECK(load.rejections[0].find("bad.json") != std::string::npos);
}

TEST_CASE("evaluate_batch") {
  FixtureDir dir("eval");
  fs::create_directories(dir.root / "predictions");

  const std::vector<std::string> tags1{"spring sale"};
  const std::vector<std::string> tags2{"fresh", "crisp"};
  const Layout ref1 = reference_layout(200, 250, 80, 100, tags1);
  const Layout ref2 = reference_layout(200, 200, 90, 120, tags2);
  write_sample(dir, "s1", 200, 250, 80, 100, tags1, ref1);
  write_sample(dir, "s2", 200, 200, 90, 120, tags2, ref2);

  auto write_prediction = [&](const std::string& id, const Layout& l) {
    std::ofstream out(dir.root / "predictions" / (id + ".json"));
    out << serialize_layout(l);
  };

  SECTION("self-comparison scores TMR = FRC = 1") {
    write_prediction("s1", ref1);
    write_prediction("s2", ref2);
    const MetricsReport r =
        evaluate_batch(dir.root / "predictions", dir.root / "records");
    CHECK(r.samples.size() == 2);
    CHECK(r.tmr.mean() == 1.0);
    CHECK(r.frc.mean() == 1.0);
    CHECK(r.unpaired_predictions.empty());
    CHECK(r.unpaired_references.empty());
  }

  SECTION("dropping a tagline halves TMR") {
    write_prediction("s1", ref1);
    Layout fewer = ref2;
    fewer.graphic.erase(
        std::find_if(fewer.graphic.begin(), fewer.graphic.end(),
                     [](const Element& e) {
                       return e.kind == ElementKind::Tagline;
                     }));
    write_prediction("s2", fewer);
    const MetricsReport r =
        evaluate_batch(dir.root / "predictions", dir.root / "records");
    CHECK(r.tmr.mean() == Approx(0.5));
  }

  SECTION("aggregates equal a second-pass mean of the rows") {
    write_prediction("s1", ref1);
    write_prediction("s2", ref2);
    const MetricsReport r =
        evaluate_batch(dir.root / "predictions", dir.root / "records");
    double uti_sum = 0, ali_sum = 0;
    for (const auto& row : r.samples) {
      uti_sum += row.metrics.uti;
      ali_sum += row.metrics.ali;
    }
    CHECK(r.uti.mean() == Approx(uti_sum / r.samples.size()).margin(1e-12));
    CHECK(r.ali.mean() == Approx(ali_sum / r.samples.size()).margin(1e-12));
  }

  SECTION("unpaired files are reported, not dropped") {
    write_prediction("s1", ref1);
    write_prediction("orphan", ref1);
    const MetricsReport r =
        evaluate_batch(dir.root / "predictions", dir.root / "records");
    REQUIRE(r.unpaired_predictions.size() == 1);
    CHECK(r.unpaired_predictions[0].find("orphan") != std::string::npos);
    REQUIRE(r.unpaired_references.size() == 1);
    CHECK(r.unpaired_references[0].find("s2") != std::string::npos);
  }

  SECTION("no pairs at all is an error") {
    CHECK_THROWS_AS(
        evaluate_batch(dir.root / "predictions", dir.root / "records"),
        InvalidInput);
  }
}

#pragma once

// Ingestion and validation of annotated samples, dataset statistics, and
// batch evaluation of predicted layouts against references.
//
// On-disk schema (one JSON record per sample, asset paths relative to the
// record's directory):
//   { "id": "s001", "image": "images/s001.png", "mask": "masks/s001.png",
//     "width": 750, "height": 1000,
//     "prompt": {"foreground": "...", "background": "..."},
//     "taglines": ["..."],
//     "layout": { ... layout JSON ... },
//     "fg_ratio": 0.82,            // optional; default from mask bounds
//     "class": "sofa",             // optional
//     "occlusion": "no"|"allow" }  // optional, default "no"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adkit/error.hpp"
#include "adkit/image.hpp"
#include "adkit/layout.hpp"
#include "adkit/metrics.hpp"
#include "adkit/png_io.hpp"

namespace adkit {

// Carries every violation found in one record, not just the first.
class SampleError : public Error {
 public:
  explicit SampleError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "sample rejected:";
    for (const std::string& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

struct Sample {
  std::string id;
  std::filesystem::path image_path;
  std::filesystem::path mask_path;
  PromptPair prompt;
  std::vector<std::string> taglines;
  Layout layout;
  int width = 0;
  int height = 0;
  double fg_ratio = 0.0;
  OcclusionClass occlusion;

  CanvasSpec canvas() const {
    return CanvasSpec::make(width, height, fg_ratio, occlusion);
  }
};

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

// Fully validates one record; either every invariant holds or the sample is
// rejected with the complete violation list.
inline Sample load_sample(const nlohmann::json& record,
                          const std::filesystem::path& root) {
  std::vector<std::string> bad;
  Sample s;

  auto need_string = [&](const char* key) -> std::optional<std::string> {
    if (!record.contains(key) || !record[key].is_string()) {
      bad.push_back(std::string("missing or non-string key: ") + key);
      return std::nullopt;
    }
    return record[key].get<std::string>();
  };

  if (auto v = need_string("id")) s.id = *v;
  if (!record.contains("width") || !record.contains("height") ||
      !record["width"].is_number_integer() ||
      !record["height"].is_number_integer()) {
    bad.push_back("width/height must be integers");
  } else {
    s.width = record["width"].get<int>();
    s.height = record["height"].get<int>();
    if (s.width <= 0 || s.height <= 0) bad.push_back("canvas size must be positive");
  }

  if (!record.contains("prompt") || !record["prompt"].is_object() ||
      !record["prompt"].contains("foreground") ||
      !record["prompt"].contains("background")) {
    bad.push_back("prompt must carry foreground and background captions");
  } else {
    s.prompt = {record["prompt"]["foreground"].get<std::string>(),
                record["prompt"]["background"].get<std::string>()};
    if (s.prompt.fore.empty() || s.prompt.back.empty())
      bad.push_back("prompt captions must be non-empty");
  }

  if (!record.contains("taglines") || !record["taglines"].is_array()) {
    bad.push_back("taglines must be an array");
  } else {
    for (const auto& t : record["taglines"]) {
      if (!t.is_string() || t.get<std::string>().empty()) {
        bad.push_back("taglines must be non-empty strings");
        break;
      }
      s.taglines.push_back(t.get<std::string>());
    }
  }

  if (!record.contains("layout")) {
    bad.push_back("missing key: layout");
  } else {
    try {
      s.layout = layout_from_json(record["layout"]);
      for (std::size_t i = 0; i < s.layout.graphic.size(); ++i) {
        const Element& e = s.layout.graphic[i];
        if (e.kind == ElementKind::Tagline &&
            (!e.content || e.content->empty()))
          bad.push_back("reference tagline " + std::to_string(i) +
                        " has no content");
      }
    } catch (const SchemaViolation& e) {
      bad.push_back(std::string("layout: ") + e.what());
    }
  }

  Image image, mask_img;
  if (auto v = need_string("image")) {
    s.image_path = root / *v;
    try {
      image = read_png(s.image_path.string());
    } catch (const Error& e) {
      bad.push_back(e.what());
    }
  }
  if (auto v = need_string("mask")) {
    s.mask_path = root / *v;
    try {
      mask_img = read_png(s.mask_path.string());
    } catch (const Error& e) {
      bad.push_back(e.what());
    }
  }
  if (!image.empty() && (image.width != s.width || image.height != s.height))
    bad.push_back("image dimensions do not match the record canvas size");
  if (!image.empty() && !mask_img.empty() &&
      (mask_img.width != image.width || mask_img.height != image.height))
    bad.push_back("mask dimensions do not match the image");

  if (record.contains("fg_ratio")) {
    s.fg_ratio = record["fg_ratio"].get<double>();
  } else if (!mask_img.empty()) {
    const Rect b = mask_bounds(image_to_mask(mask_img));
    if (b.empty()) bad.push_back("mask has no foreground pixels");
    else s.fg_ratio = b.width() / b.height();
  }
  if (bad.empty() && !(s.fg_ratio > 0.0))
    bad.push_back("foreground ratio must be strictly positive");

  const std::string cls = record.contains("class")
                              ? record["class"].get<std::string>()
                              : "product";
  const std::string occ = record.contains("occlusion")
                              ? record["occlusion"].get<std::string>()
                              : "no";
  s.occlusion = occ == "allow" ? OcclusionClass::allow_occ(cls)
                               : OcclusionClass::no_occ(cls);

  if (!bad.empty()) throw SampleError(std::move(bad));
  return s;
}

inline Sample load_sample_file(const std::filesystem::path& record_path) {
  std::ifstream in(record_path);
  if (!in) throw SampleError({"cannot open record: " + record_path.string()});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SampleError({std::string("malformed record JSON: ") + e.what()});
  }
  return load_sample(j, record_path.parent_path());
}

// Manifest: {"samples": ["records/s001.json", ...]} with paths relative to
// the manifest file.
struct ManifestLoad {
  std::vector<Sample> samples;
  std::vector<std::string> rejections;  // "path: reasons"
};

inline ManifestLoad load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw InvalidInput("cannot open manifest: " + manifest_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaViolation("/", std::string("malformed manifest: ") + e.what());
  }
  if (!j.contains("samples") || !j["samples"].is_array())
    throw SchemaViolation("/samples", "manifest requires a samples array");
  ManifestLoad out;
  const auto root = manifest_path.parent_path();
  for (const auto& entry : j["samples"]) {
    const std::filesystem::path rec = root / entry.get<std::string>();
    try {
      out.samples.push_back(load_sample_file(rec));
    } catch (const SampleError& e) {
      out.rejections.push_back(rec.string() + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct DatasetStats {
  std::size_t sample_count = 0;
  // Aspect ratios bucketed with tolerance 1e-3; first-seen value represents
  // the bucket.
  std::vector<std::pair<double, std::size_t>> aspect_histogram;
  std::map<std::string, std::size_t> element_counts;
  std::map<std::size_t, std::size_t> tagline_count_histogram;
  std::vector<std::string> invalid_records;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["sample_count"] = sample_count;
    j["aspect_histogram"] = nlohmann::json::array();
    for (const auto& [ratio, count] : aspect_histogram)
      j["aspect_histogram"].push_back({{"ratio", ratio}, {"count", count}});
    j["element_counts"] = element_counts;
    j["tagline_count_histogram"] = nlohmann::json::object();
    for (const auto& [n, count] : tagline_count_histogram)
      j["tagline_count_histogram"][std::to_string(n)] = count;
    j["invalid_records"] = invalid_records;
    return j;
  }
};

inline DatasetStats dataset_stats(const std::vector<Sample>& samples,
                                  std::vector<std::string> invalid = {}) {
  DatasetStats stats;
  stats.sample_count = samples.size();
  stats.invalid_records = std::move(invalid);
  for (const Sample& s : samples) {
    const double ratio = static_cast<double>(s.width) / s.height;
    bool bucketed = false;
    for (auto& [rep, count] : stats.aspect_histogram)
      if (std::abs(rep - ratio) <= 1e-3) {
        ++count;
        bucketed = true;
        break;
      }
    if (!bucketed) stats.aspect_histogram.emplace_back(ratio, 1);

    stats.element_counts["subject"] += 1;
    stats.element_counts["nongraphic"] += s.layout.nongraphic.size();
    for (const Element& e : s.layout.graphic)
      stats.element_counts[kind_name(e.kind)] += 1;
    stats.tagline_count_histogram[s.taglines.size()] += 1;
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Batch evaluation
// ---------------------------------------------------------------------------

// Pairs <id>.json prediction layouts with <id>.json reference records and
// computes the full metric set per pair plus aggregates. Unpaired files on
// either side are reported, never silently dropped.
inline MetricsReport evaluate_batch(const std::filesystem::path& predictions_dir,
                                    const std::filesystem::path& references_dir,
                                    Warnings* warnings = nullptr) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(predictions_dir))
    throw InvalidInput("predictions dir not found: " + predictions_dir.string());
  if (!fs::is_directory(references_dir))
    throw InvalidInput("references dir not found: " + references_dir.string());

  std::map<std::string, fs::path> predictions, references;
  for (const auto& entry : fs::directory_iterator(predictions_dir))
    if (entry.path().extension() == ".json")
      predictions[entry.path().stem().string()] = entry.path();
  for (const auto& entry : fs::directory_iterator(references_dir))
    if (entry.path().extension() == ".json")
      references[entry.path().stem().string()] = entry.path();

  MetricsReport report;
  std::size_t pairs = 0;
  for (const auto& [id, pred_path] : predictions) {
    const auto ref_it = references.find(id);
    if (ref_it == references.end()) {
      report.unpaired_predictions.push_back(pred_path.string());
      continue;
    }
    ++pairs;

    Sample ref;
    try {
      ref = load_sample_file(ref_it->second);
    } catch (const SampleError& e) {
      report.unpaired_references.push_back(ref_it->second.string() +
                                           ": " + e.what());
      continue;
    }

    std::ifstream in(pred_path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    Layout predicted;
    try {
      predicted = parse_layout(text, {.clamp_out_of_range = true}, warnings);
    } catch (const SchemaViolation& e) {
      report.unpaired_predictions.push_back(pred_path.string() +
                                            ": " + e.what());
      continue;
    }

    const Image background = read_png(ref.image_path.string());
    const Mask mask = image_to_mask(read_png(ref.mask_path.string()));
    const CanvasSpec spec = ref.canvas();

    SampleMetrics row;
    row.id = id;
    row.metrics = compute_layout_metrics(
        predicted, SubjectRegion::from_mask(mask), &background, warnings);
    row.tagline_match = tagline_count(predicted) == ref.taglines.size();
    row.fg_ratio_correct = fg_ratio_correct(predicted, spec);
    report.add(std::move(row));
  }
  for (const auto& [id, ref_path] : references)
    if (!predictions.contains(id))
      report.unpaired_references.push_back(ref_path.string());

  if (pairs == 0)
    throw InvalidInput("no prediction/reference pairs found");
  return report;
}

}  // namespace adkit

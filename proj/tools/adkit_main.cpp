// adkit — product-centric advertising layout toolkit.
//
// Subcommands:
//   design            run the four-stage pipeline on one job
//   evaluate          score predicted layouts against reference samples
//   render            composite a layout onto a background image
//   validate-dataset  check every record behind a manifest
//   stats             dataset statistics
//   gen-gsa           seeded conditioning-parameter fixtures
//
// Exit codes: 0 success, 2 validation/schema failure, 3 backend failure,
// 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "adkit/conditioning.hpp"
#include "adkit/dataset.hpp"
#include "adkit/http_backend.hpp"
#include "adkit/pipeline.hpp"
#include "adkit/png_io.hpp"
#include "adkit/raster_oracle.hpp"
#include "adkit/render.hpp"

namespace fs = std::filesystem;
using namespace adkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;
constexpr int kExitBackend = 3;

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos)
    throw CLI::ValidationError("--size", "expected <width>x<height>");
  try {
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--size", "expected <width>x<height>");
  }
}

void apply_env_overrides(BackendSelection& sel) {
  auto apply = [](StageEndpoint& ep, const char* var) {
    if (const char* url = std::getenv(var)) {
      ep.kind = "http";
      ep.url = url;
    }
  };
  apply(sel.prompt, "ADKIT_PROMPT_URL");
  apply(sel.layout, "ADKIT_LAYOUT_URL");
  apply(sel.background, "ADKIT_BACKGROUND_URL");
}

nlohmann::json warnings_json(const Warnings& w) {
  return nlohmann::json(w.messages);
}

nlohmann::json metrics_json(const LayoutMetrics& m) {
  nlohmann::json j{{"val", m.val}, {"ove", m.ove}, {"ali", m.ali},
                   {"uti", m.uti}, {"occ", m.occ}};
  if (m.und_l) j["und_l"] = *m.und_l;
  if (m.und_s) j["und_s"] = *m.und_s;
  if (m.rea) j["rea"] = *m.rea;
  return j;
}

int run_design_cmd(const std::string& fg_path,
                   const std::vector<std::string>& taglines,
                   const std::string& size_str, const std::string& cls,
                   const std::string& occlusion,
                   const std::string& logo_path,
                   const std::string& backends_path,
                   const std::string& out_dir) {
  DesignJob job;
  job.foreground = read_png(fg_path);
  job.taglines = taglines;
  std::tie(job.width, job.height) = parse_size(size_str);
  job.occlusion = occlusion == "allow" ? OcclusionClass::allow_occ(cls)
                                       : OcclusionClass::no_occ(cls);
  if (!logo_path.empty()) job.logo = read_png(logo_path);

  if (!backends_path.empty()) {
    std::ifstream in(backends_path);
    if (!in) {
      std::cerr << "cannot read backend config: " << backends_path << "\n";
      return kExitValidation;
    }
    nlohmann::json j;
    in >> j;
    job.backends = backend_selection_from_json(j);
  }
  apply_env_overrides(job.backends);

  const DesignResult res = run_design(job, make_backends(job.backends));

  fs::create_directories(out_dir);
  nlohmann::json result;
  result["ok"] = res.ok();
  result["timings_ms"] = nlohmann::json::object();
  for (const auto& [stage, ms] : res.timings_ms) result["timings_ms"][stage] = ms;
  result["warnings"] = warnings_json(res.warnings);
  result["backends"] = {{"prompt", job.backends.prompt.kind},
                        {"layout", job.backends.layout.kind},
                        {"background", job.backends.background.kind}};

  if (!res.prompt.fore.empty()) {
    nlohmann::json pj{{"foreground", res.prompt.fore},
                      {"background", res.prompt.back}};
    std::ofstream(fs::path(out_dir) / "prompt.json") << pj.dump(2) << "\n";
  }
  if (!res.layout_json.empty())
    std::ofstream(fs::path(out_dir) / "layout.json") << res.layout_json << "\n";
  if (!res.background.empty())
    write_png((fs::path(out_dir) / "background.png").string(), res.background);
  if (!res.final_image.empty())
    write_png((fs::path(out_dir) / "final.png").string(), res.final_image);
  if (res.metrics) result["metrics"] = metrics_json(*res.metrics);
  if (res.failure)
    result["failure"] = {{"stage", res.failure->stage},
                         {"kind", res.failure->kind},
                         {"detail", res.failure->detail}};
  std::ofstream(fs::path(out_dir) / "result.json") << result.dump(2) << "\n";

  if (!res.ok()) {
    std::cerr << "stage " << res.failure->stage << " failed ("
              << res.failure->kind << "): " << res.failure->detail << "\n";
    return res.failure->kind == "backend" || res.failure->kind == "timeout"
               ? kExitBackend
               : kExitValidation;
  }
  std::cout << "wrote " << (fs::path(out_dir) / "final.png").string() << "\n";
  return kExitOk;
}

int run_evaluate_cmd(const std::string& predictions, const std::string& references,
                     const std::string& report_path, bool raster_oracle) {
  Warnings warnings;
  MetricsReport report = evaluate_batch(predictions, references, &warnings);

  nlohmann::json j = report.to_json();
  j["warnings"] = warnings_json(warnings);

  if (raster_oracle) {
    // Cross-check the exact geometry kernel against pixel sampling on every
    // predicted layout.
    double max_union_delta = 0.0, max_overlap_delta = 0.0;
    for (const auto& entry : fs::directory_iterator(predictions)) {
      if (entry.path().extension() != ".json") continue;
      std::ifstream in(entry.path());
      std::string text((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
      Layout l;
      try {
        l = parse_layout(text, {.clamp_out_of_range = true});
      } catch (const SchemaViolation&) {
        continue;
      }
      std::vector<BBox> boxes;
      for (const Element& e : l.graphic)
        if (element_valid(e)) boxes.push_back(e.bbox);
      max_union_delta = std::max(
          max_union_delta,
          std::abs(union_area(boxes) - oracle::union_area(boxes, 1000)));
      max_overlap_delta =
          std::max(max_overlap_delta,
                   std::abs(overlap(l) - oracle::overlap(l, 1000)));
    }
    j["raster_oracle"] = {{"grid", 1000},
                          {"max_union_delta", max_union_delta},
                          {"max_overlap_delta", max_overlap_delta}};
    std::cout << "raster oracle: max union delta " << max_union_delta
              << ", max overlap delta " << max_overlap_delta << "\n";
  }

  std::ofstream out(report_path);
  if (!out) {
    std::cerr << "cannot write report: " << report_path << "\n";
    return kExitError;
  }
  out << j.dump(2) << "\n";

  auto print = [](const char* name, const MeanCount& m) {
    if (m.defined())
      std::cout << "  " << name << ": " << m.mean() << "  (n=" << m.n << ")\n";
  };
  std::cout << "evaluated " << report.samples.size() << " pairs\n";
  print("val", report.val);
  print("ove", report.ove);
  print("ali", report.ali);
  print("und_l", report.und_l);
  print("und_s", report.und_s);
  print("uti", report.uti);
  print("occ", report.occ);
  print("rea", report.rea);
  print("tmr", report.tmr);
  print("frc", report.frc);
  if (!report.unpaired_predictions.empty() ||
      !report.unpaired_references.empty())
    std::cout << "unpaired: " << report.unpaired_predictions.size()
              << " prediction(s), " << report.unpaired_references.size()
              << " reference(s)\n";
  return kExitOk;
}

int run_render_cmd(const std::string& layout_path, const std::string& bg_path,
                   const std::string& out_path, const std::string& fg_path,
                   const std::string& logo_path, const std::string& shapes_path) {
  std::ifstream in(layout_path);
  if (!in) {
    std::cerr << "cannot read layout: " << layout_path << "\n";
    return kExitValidation;
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  Warnings warnings;
  const Layout layout = parse_layout(text, {.clamp_out_of_range = true},
                                     &warnings);
  const Image background = read_png(bg_path);

  Color fg_color{32, 32, 32};
  if (!fg_path.empty()) fg_color = mean_foreground_color(read_png(fg_path));
  else fg_color = region_mean_color(background, layout.subject.bbox);

  std::optional<Image> logo;
  if (!logo_path.empty()) logo = read_png(logo_path);
  const ShapeLibrary lib = shapes_path.empty() ? ShapeLibrary::builtin()
                                               : load_shape_library(shapes_path);

  const StyleAssignment styles =
      assign_styles(layout, fg_color, background, default_fonts(),
                    default_palette(), lib, {}, &warnings);
  const Image out = render(layout, background, styles,
                           logo ? &*logo : nullptr, {}, &warnings);
  write_png(out_path, out);
  for (const std::string& w : warnings.messages)
    std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

int run_validate_cmd(const std::string& manifest) {
  const ManifestLoad load = load_manifest(manifest);
  std::cout << load.samples.size() << " valid sample(s)\n";
  for (const std::string& r : load.rejections)
    std::cerr << "rejected: " << r << "\n";
  return load.rejections.empty() ? kExitOk : kExitValidation;
}

int run_stats_cmd(const std::string& manifest, const std::string& out_path) {
  const ManifestLoad load = load_manifest(manifest);
  const DatasetStats stats = dataset_stats(load.samples, load.rejections);
  const nlohmann::json j = stats.to_json();
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    out << j.dump(2) << "\n";
    std::cout << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

int run_gen_gsa_cmd(std::size_t d_model, std::size_t name_dim, int num_freqs,
                    double gamma, std::uint64_t seed, const std::string& out) {
  const GsaParams p = random_gsa_params(d_model, name_dim, num_freqs, gamma, seed);
  save_gsa_params(p, out);
  std::cout << "wrote " << out << " (d_model=" << d_model
            << ", name_dim=" << name_dim << ", num_freqs=" << num_freqs
            << ", seed=" << seed << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"product-centric advertising layout toolkit"};
  app.require_subcommand(1);

  // design
  std::string fg_path, size_str = "1024x1024", cls = "product";
  std::string occlusion = "no", logo_path, backends_path, out_dir = "out";
  std::vector<std::string> taglines;
  auto* design = app.add_subcommand("design", "run the full design pipeline");
  design->add_option("--foreground", fg_path, "product foreground PNG (RGBA)")
      ->required();
  design->add_option("--tagline", taglines, "marketing tagline (repeatable)");
  design->add_option("--size", size_str, "target size <width>x<height>");
  design->add_option("--class", cls, "product class for the layout condition");
  design->add_option("--occlusion", occlusion, "no | allow")
      ->check(CLI::IsMember({"no", "allow"}));
  design->add_option("--logo", logo_path, "logo PNG");
  design->add_option("--backends", backends_path, "backend config JSON");
  design->add_option("--out", out_dir, "output directory");

  // evaluate
  std::string predictions, references, report_path = "report.json";
  bool raster_oracle = false;
  auto* evaluate = app.add_subcommand("evaluate",
                                      "score predictions against references");
  evaluate->add_option("--predictions", predictions, "directory of <id>.json layouts")
      ->required();
  evaluate->add_option("--references", references, "directory of <id>.json records")
      ->required();
  evaluate->add_option("--report", report_path, "output report JSON");
  evaluate->add_flag("--raster-oracle", raster_oracle,
                     "cross-check geometry against pixel sampling");

  // render
  std::string layout_path, bg_path, out_path = "final.png", shapes_path;
  std::string render_fg, render_logo;
  auto* render_cmd = app.add_subcommand("render", "composite a layout");
  render_cmd->add_option("--layout", layout_path, "layout JSON")->required();
  render_cmd->add_option("--background", bg_path, "background PNG")->required();
  render_cmd->add_option("--out", out_path, "output PNG");
  render_cmd->add_option("--foreground", render_fg,
                         "foreground PNG for color similarity");
  render_cmd->add_option("--logo", render_logo, "logo PNG");
  render_cmd->add_option("--shapes", shapes_path, "shape library manifest");

  // validate-dataset
  std::string manifest;
  auto* validate = app.add_subcommand("validate-dataset",
                                      "validate every record in a manifest");
  validate->add_option("--manifest", manifest, "manifest JSON")->required();

  // stats
  std::string stats_manifest, stats_out;
  auto* stats = app.add_subcommand("stats", "dataset statistics");
  stats->add_option("--manifest", stats_manifest, "manifest JSON")->required();
  stats->add_option("--out", stats_out, "output JSON (stdout when omitted)");

  // gen-gsa
  std::size_t d_model = 64, name_dim = 32;
  int num_freqs = 8;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::string gsa_out = "gsa_params.json";
  auto* gen = app.add_subcommand("gen-gsa",
                                 "generate seeded conditioning parameters");
  gen->add_option("--d-model", d_model, "attention model dimension");
  gen->add_option("--name-dim", name_dim, "name embedding dimension");
  gen->add_option("--num-freqs", num_freqs, "Fourier frequency count");
  gen->add_option("--gamma", gamma, "gate value");
  gen->add_option("--seed", seed, "deterministic seed")->required();
  gen->add_option("--out", gsa_out, "output fixture path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (design->parsed())
      return run_design_cmd(fg_path, taglines, size_str, cls, occlusion,
                            logo_path, backends_path, out_dir);
    if (evaluate->parsed())
      return run_evaluate_cmd(predictions, references, report_path,
                              raster_oracle);
    if (render_cmd->parsed())
      return run_render_cmd(layout_path, bg_path, out_path, render_fg,
                            render_logo, shapes_path);
    if (validate->parsed()) return run_validate_cmd(manifest);
    if (stats->parsed()) return run_stats_cmd(stats_manifest, stats_out);
    if (gen->parsed())
      return run_gen_gsa_cmd(d_model, name_dim, num_freqs, gamma, seed, gsa_out);
  } catch (const BackendError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const SchemaViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SampleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

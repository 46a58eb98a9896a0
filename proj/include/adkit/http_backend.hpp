#pragma once

// HTTP clients binding the pipeline stages to remote model services.
// Wire contract (this repo's own):
//   POST <url>/prompt      body: PNG            -> {"foreground","background"}
//   POST <url>/layout      body: request JSON   -> layout JSON
//   POST <url>/background  multipart (prompt, layout, foreground PNG) -> PNG
// Responses are schema-validated; out-of-range coordinates in layout
// responses are clamped with warnings per the lenient parse policy.

#include <memory>
#include <string>

#include <httplib.h>

#include "adkit/error.hpp"
#include "adkit/pipeline.hpp"
#include "adkit/png_io.hpp"

namespace adkit {

namespace detail {

inline std::string body_excerpt(const std::string& body) {
  constexpr std::size_t kMax = 160;
  if (body.size() <= kMax) return body;
  return body.substr(0, kMax) + "...";
}

inline bool is_timeout(httplib::Error e) {
  return e == httplib::Error::ConnectionTimeout ||
         e == httplib::Error::Read || e == httplib::Error::Write;
}

// One POST with retry-on-transport-error; HTTP error statuses are not
// retried.
inline httplib::Result post_with_retries(const StageEndpoint& ep,
                                         const std::string& stage,
                                         const std::string& path,
                                         const httplib::Headers& headers,
                                         const std::string& body,
                                         const std::string& content_type) {
  for (int attempt = 0;; ++attempt) {
    httplib::Client client(ep.url);
    client.set_connection_timeout(0, ep.timeout_ms * 1000);
    client.set_read_timeout(0, ep.timeout_ms * 1000);
    client.set_write_timeout(0, ep.timeout_ms * 1000);
    auto res = client.Post(path, headers, body, content_type);
    if (res) return res;
    if (attempt >= ep.retries) {
      if (is_timeout(res.error()))
        throw BackendTimeout(stage, httplib::to_string(res.error()));
      throw BackendError(stage, httplib::to_string(res.error()));
    }
  }
}

inline void require_status_ok(const httplib::Result& res,
                              const std::string& stage) {
  if (res->status < 200 || res->status >= 300)
    throw BackendError(stage, "HTTP " + std::to_string(res->status) + ": " +
                                  body_excerpt(res->body));
}

}  // namespace detail

class HttpPromptBackend final : public PromptBackend {
 public:
  explicit HttpPromptBackend(StageEndpoint ep) : ep_(std::move(ep)) {}

  PromptPair generate(const Image& foreground) override {
    const auto png = encode_png(foreground);
    const std::string body(png.begin(), png.end());
    auto res =
        detail::post_with_retries(ep_, "prompt", "/prompt", {}, body, "image/png");
    detail::require_status_ok(res, "prompt");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw SchemaViolation("/", "prompt response is not JSON: " +
                                     detail::body_excerpt(res->body));
    }
    if (!j.contains("foreground") || !j.contains("background"))
      throw SchemaViolation("/", "prompt response missing keys: " +
                                     detail::body_excerpt(res->body));
    PromptPair p{j["foreground"].get<std::string>(),
                 j["background"].get<std::string>()};
    p.validate();
    return p;
  }

  std::string name() const override { return "http:" + ep_.url; }

 private:
  StageEndpoint ep_;
};

class HttpLayoutBackend final : public LayoutBackend {
 public:
  explicit HttpLayoutBackend(StageEndpoint ep) : ep_(std::move(ep)) {}

  Layout generate(const LayoutRequest& request, Warnings* warnings) override {
    auto res = detail::post_with_retries(ep_, "layout", "/layout", {},
                                         request.to_json().dump(),
                                         "application/json");
    detail::require_status_ok(res, "layout");
    try {
      return parse_layout(res->body, {.clamp_out_of_range = true}, warnings);
    } catch (const SchemaViolation& e) {
      throw SchemaViolation(e.path(), std::string(e.what()) + "; body: " +
                                          detail::body_excerpt(res->body));
    }
  }

  std::string name() const override { return "http:" + ep_.url; }

 private:
  StageEndpoint ep_;
};

class HttpBackgroundBackend final : public BackgroundBackend {
 public:
  explicit HttpBackgroundBackend(StageEndpoint ep) : ep_(std::move(ep)) {}

  Image generate(const PromptPair& prompt, const Layout& layout,
                 const Image& foreground, int width, int height) override {
    const auto png = encode_png(foreground);
    nlohmann::json pj{{"foreground", prompt.fore},
                      {"background", prompt.back},
                      {"width", width},
                      {"height", height}};
    httplib::MultipartFormDataItems items{
        {"prompt", pj.dump(), "prompt.json", "application/json"},
        {"layout", serialize_layout(layout), "layout.json", "application/json"},
        {"foreground", std::string(png.begin(), png.end()), "foreground.png",
         "image/png"}};
    httplib::Result res = [&] {
      for (int attempt = 0;; ++attempt) {
        httplib::Client client(ep_.url);
        client.set_connection_timeout(0, ep_.timeout_ms * 1000);
        client.set_read_timeout(0, ep_.timeout_ms * 1000);
        client.set_write_timeout(0, ep_.timeout_ms * 1000);
        auto r = client.Post("/background", items);
        if (r) return r;
        if (attempt >= ep_.retries) {
          if (detail::is_timeout(r.error()))
            throw BackendTimeout("background", httplib::to_string(r.error()));
          throw BackendError("background", httplib::to_string(r.error()));
        }
      }
    }();
    detail::require_status_ok(res, "background");
    try {
      return decode_png(
          reinterpret_cast<const std::uint8_t*>(res->body.data()),
          res->body.size());
    } catch (const PngError& e) {
      throw SchemaViolation("/", std::string("background response is not a "
                                             "PNG: ") +
                                     e.what());
    }
  }

  std::string name() const override { return "http:" + ep_.url; }

 private:
  StageEndpoint ep_;
};

// Builds the backend set described by the job's per-stage selection.
inline StageBackends make_backends(const BackendSelection& sel) {
  StageBackends b = stub_backends();
  if (sel.prompt.kind == "http")
    b.prompt = std::make_shared<HttpPromptBackend>(sel.prompt);
  if (sel.layout.kind == "http")
    b.layout = std::make_shared<HttpLayoutBackend>(sel.layout);
  if (sel.background.kind == "http")
    b.background = std::make_shared<HttpBackgroundBackend>(sel.background);
  return b;
}

inline StageEndpoint endpoint_from_json(const nlohmann::json& j,
                                        const std::string& path) {
  StageEndpoint ep;
  if (!j.is_object()) throw SchemaViolation(path, "must be an object");
  if (j.contains("kind")) ep.kind = j["kind"].get<std::string>();
  if (ep.kind != "stub" && ep.kind != "http")
    throw SchemaViolation(path + "/kind", "must be \"stub\" or \"http\"");
  if (j.contains("url")) ep.url = j["url"].get<std::string>();
  if (ep.kind == "http" && ep.url.empty())
    throw SchemaViolation(path, "http backend requires a url");
  if (j.contains("timeout_ms")) ep.timeout_ms = j["timeout_ms"].get<int>();
  if (j.contains("retries")) ep.retries = j["retries"].get<int>();
  return ep;
}

// Config file: {"prompt": {...}, "layout": {...}, "background": {...}},
// each entry {"kind": "stub"|"http", "url", "timeout_ms", "retries"}.
// Missing stages default to stubs.
inline BackendSelection backend_selection_from_json(const nlohmann::json& j) {
  BackendSelection sel;
  if (!j.is_object()) throw SchemaViolation("/", "config must be an object");
  if (j.contains("prompt"))
    sel.prompt = endpoint_from_json(j["prompt"], "/prompt");
  if (j.contains("layout"))
    sel.layout = endpoint_from_json(j["layout"], "/layout");
  if (j.contains("background"))
    sel.background = endpoint_from_json(j["background"], "/background");
  return sel;
}

}  // namespace adkit

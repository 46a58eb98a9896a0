#pragma once

// Desk-scale implementation of the layout-conditioning math: Fourier
// location features, layout-token fusion, the gated self-attention layer
// and deep-layer block selection. Everything is deterministic double
// arithmetic; parameters come from fixtures or a seeded generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "adkit/error.hpp"
#include "adkit/layout.hpp"

namespace adkit {

// Minimal dense row-major matrix; all the attention math needs.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  static Matrix zeros(std::size_t r, std::size_t c) {
    return {r, c, std::vector<double>(r * c, 0.0)};
  }

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

inline void check_finite(const Matrix& m, const char* what) {
  for (double v : m.data)
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + ": non-finite value");
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw ShapeError("matmul: " + std::to_string(a.cols) + " vs " +
                     std::to_string(b.rows));
  Matrix out = Matrix::zeros(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j)
        out.at(i, j) += aik * b.at(k, j);
    }
  return out;
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.rows == 0) return b;
  if (b.rows == 0) return a;
  if (a.cols != b.cols) throw ShapeError("vstack: column mismatch");
  Matrix out = a;
  out.rows += b.rows;
  out.data.insert(out.data.end(), b.data.begin(), b.data.end());
  return out;
}

// ---------------------------------------------------------------------------
// Fourier location embedding
// ---------------------------------------------------------------------------

// Location features of a box: the center box is first converted to
// normalized top-left / bottom-right corners (x0, y0, x1, y1); each
// coordinate v contributes sin(2^k pi v), cos(2^k pi v) for
// k = 0..num_freqs-1. Layout: coordinate-major, frequency-minor,
// sin before cos; total length 8 * num_freqs.
inline std::vector<double> fourier_embed(const BBox& box, int num_freqs) {
  if (num_freqs <= 0) throw InvalidInput("fourier_embed: num_freqs must be > 0");
  const double coords[4] = {box.left(), box.top(), box.right(), box.bottom()};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(8) * num_freqs);
  for (double v : coords) {
    double freq = std::numbers::pi;
    for (int k = 0; k < num_freqs; ++k) {
      out.push_back(std::sin(freq * v));
      out.push_back(std::cos(freq * v));
      freq *= 2.0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct MlpParams {
  Matrix weight;             // (name_dim + 8*num_freqs) x d_model
  std::vector<double> bias;  // d_model
};

struct GsaParams {
  Matrix wq, wk, wv;  // d_model x d_key (wv: d_model x d_value)
  Matrix wo;          // d_value x d_model
  double gamma = 0.0;
  MlpParams mlp;
  int num_freqs = 8;

  std::size_t d_model() const { return wq.rows; }

  void validate() const {
    if (!std::isfinite(gamma)) throw InvalidInput("gamma must be finite");
    if (wk.rows != wq.rows || wv.rows != wq.rows)
      throw ShapeError("attention weights disagree on model dimension");
    if (wk.cols != wq.cols) throw ShapeError("wq/wk key dimensions differ");
    if (wo.rows != wv.cols) throw ShapeError("wo rows must match wv cols");
    if (wo.cols != wq.rows) throw ShapeError("wo must project back to d_model");
    if (num_freqs <= 0) throw InvalidInput("num_freqs must be > 0");
    if (!mlp.weight.data.empty()) {
      if (mlp.weight.cols != d_model())
        throw ShapeError("mlp output dimension must equal d_model");
      if (mlp.bias.size() != mlp.weight.cols)
        throw ShapeError("mlp bias length must equal output dimension");
    }
  }
};

// ---------------------------------------------------------------------------
// Layout tokens
// ---------------------------------------------------------------------------

struct NamedBox {
  std::vector<double> name_embedding;
  BBox bbox;
};

// Row i is mlp(concat(name_embedding_i, fourier_embed(box_i))). The fusion
// MLP is a single linear layer with bias.
inline Matrix build_layout_tokens(const std::vector<NamedBox>& elements,
                                  const GsaParams& params) {
  params.validate();
  if (params.mlp.weight.data.empty())
    throw ShapeError("build_layout_tokens: params carry no MLP weights");
  const std::size_t d = params.mlp.weight.cols;
  Matrix out = Matrix::zeros(elements.size(), d);
  const std::size_t in_dim = params.mlp.weight.rows;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    std::vector<double> input = elements[i].name_embedding;
    const auto loc = fourier_embed(elements[i].bbox, params.num_freqs);
    input.insert(input.end(), loc.begin(), loc.end());
    if (input.size() != in_dim)
      throw ShapeError("build_layout_tokens: token " + std::to_string(i) +
                       " has input dim " + std::to_string(input.size()) +
                       ", expected " + std::to_string(in_dim));
    for (std::size_t j = 0; j < d; ++j) {
      double acc = params.mlp.bias[j];
      for (std::size_t k = 0; k < in_dim; ++k)
        acc += input[k] * params.mlp.weight.at(k, j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gated self-attention
// ---------------------------------------------------------------------------

// Single-head softmax self-attention with 1/sqrt(d_key) scaling and output
// projection.
inline Matrix self_attention(const Matrix& x, const GsaParams& params) {
  params.validate();
  if (x.cols != params.d_model())
    throw ShapeError("self_attention: input dim " + std::to_string(x.cols) +
                     " vs d_model " + std::to_string(params.d_model()));
  check_finite(x, "self_attention input");
  const Matrix q = matmul(x, params.wq);
  const Matrix k = matmul(x, params.wk);
  const Matrix v = matmul(x, params.wv);
  const std::size_t n = x.rows;
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.wq.cols));

  Matrix attn = Matrix::zeros(n, v.cols);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < q.cols; ++c) s += q.at(i, c) * k.at(j, c);
      scores[j] = s * scale;
      max_score = std::max(max_score, scores[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      scores[j] = std::exp(scores[j] - max_score);
      denom += scores[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double w = scores[j] / denom;
      for (std::size_t c = 0; c < v.cols; ++c)
        attn.at(i, c) += w * v.at(j, c);
    }
  }
  return matmul(attn, params.wo);
}

// GSA(V, E) = V + tanh(gamma) * SA(cat(V, E))[:M]. The [:M] truncation is
// taken after the output projection. Output shape is always M x d, N = 0
// included.
inline Matrix gated_self_attention(const Matrix& v, const Matrix& e,
                                   const GsaParams& params) {
  if (v.cols != params.d_model())
    throw ShapeError("gated_self_attention: V dim mismatch");
  if (e.rows > 0 && e.cols != v.cols)
    throw ShapeError("gated_self_attention: E dim mismatch");
  const Matrix full = self_attention(vstack(v, e), params);
  const double gate = std::tanh(params.gamma);
  Matrix out = v;
  for (std::size_t i = 0; i < v.rows; ++i)
    for (std::size_t c = 0; c < v.cols; ++c)
      out.at(i, c) = v.at(i, c) + gate * full.at(i, c);
  return out;
}

// ---------------------------------------------------------------------------
// Deep layer control
// ---------------------------------------------------------------------------

enum class UnetStage { Down, Middle, Up };

struct UnetBlock {
  std::string id;
  UnetStage stage = UnetStage::Down;
  int resolution = 0;
};

struct UnetSpec {
  std::vector<UnetBlock> blocks;

  void validate() const {
    std::size_t middles = 0;
    for (const UnetBlock& b : blocks) middles += b.stage == UnetStage::Middle;
    if (middles != 1)
      throw InvalidInput("unet spec must contain exactly one middle block");
  }
};

// The middle block plus every up block at the lowest up resolution.
inline std::vector<std::string> dlc_blocks(const UnetSpec& spec,
                                           Warnings* warnings = nullptr) {
  spec.validate();
  std::vector<std::string> out;
  int min_up = std::numeric_limits<int>::max();
  bool any_up = false;
  for (const UnetBlock& b : spec.blocks)
    if (b.stage == UnetStage::Up) {
      any_up = true;
      min_up = std::min(min_up, b.resolution);
    }
  for (const UnetBlock& b : spec.blocks) {
    if (b.stage == UnetStage::Middle) out.push_back(b.id);
    if (b.stage == UnetStage::Up && b.resolution == min_up) out.push_back(b.id);
  }
  if (!any_up)
    warn(warnings, "dlc_blocks: no up blocks; selecting the middle block only");
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic seeding and the fixture file format
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double unit_real(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Deterministic stand-in for a text encoder: a unit vector derived from the
// element name alone.
inline std::vector<double> hash_name_embedding(std::string_view name,
                                               std::size_t dim) {
  if (dim == 0) throw InvalidInput("hash_name_embedding: dim must be > 0");
  std::uint64_t state = fnv1a64(name);
  std::vector<double> v(dim);
  double norm_sq = 0.0;
  for (double& x : v) {
    x = 2.0 * unit_real(state) - 1.0;
    norm_sq += x * x;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0)
    for (double& x : v) x /= norm;
  return v;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols,
                            std::uint64_t& state, double scale = 0.05) {
  Matrix m = Matrix::zeros(rows, cols);
  for (double& v : m.data) v = (2.0 * unit_real(state) - 1.0) * scale;
  return m;
}

inline GsaParams random_gsa_params(std::size_t d_model, std::size_t name_dim,
                                   int num_freqs, double gamma,
                                   std::uint64_t seed) {
  std::uint64_t state = seed;
  GsaParams p;
  p.wq = random_matrix(d_model, d_model, state);
  p.wk = random_matrix(d_model, d_model, state);
  p.wv = random_matrix(d_model, d_model, state);
  p.wo = random_matrix(d_model, d_model, state);
  p.gamma = gamma;
  p.num_freqs = num_freqs;
  p.mlp.weight = random_matrix(name_dim + 8 * static_cast<std::size_t>(num_freqs),
                               d_model, state);
  p.mlp.bias.resize(d_model);
  for (double& b : p.mlp.bias) b = (2.0 * unit_real(state) - 1.0) * 0.05;
  p.validate();
  return p;
}

// Fixture format: shape headers plus flat row-major arrays.
inline nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data"))
    throw SchemaViolation(path, "matrix requires rows/cols/data");
  Matrix m;
  m.rows = j["rows"].get<std::size_t>();
  m.cols = j["cols"].get<std::size_t>();
  m.data = j["data"].get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols)
    throw SchemaViolation(path, "data length does not match rows*cols");
  check_finite(m, path.c_str());
  return m;
}

inline nlohmann::json gsa_params_to_json(const GsaParams& p) {
  return {{"wq", matrix_to_json(p.wq)},   {"wk", matrix_to_json(p.wk)},
          {"wv", matrix_to_json(p.wv)},   {"wo", matrix_to_json(p.wo)},
          {"gamma", p.gamma},             {"num_freqs", p.num_freqs},
          {"mlp_weight", matrix_to_json(p.mlp.weight)},
          {"mlp_bias", p.mlp.bias}};
}

inline GsaParams gsa_params_from_json(const nlohmann::json& j) {
  GsaParams p;
  for (const char* key :
       {"wq", "wk", "wv", "wo", "gamma", "num_freqs", "mlp_weight", "mlp_bias"})
    if (!j.contains(key))
      throw SchemaViolation("/", std::string("missing key: ") + key);
  p.wq = matrix_from_json(j["wq"], "/wq");
  p.wk = matrix_from_json(j["wk"], "/wk");
  p.wv = matrix_from_json(j["wv"], "/wv");
  p.wo = matrix_from_json(j["wo"], "/wo");
  p.gamma = j["gamma"].get<double>();
  p.num_freqs = j["num_freqs"].get<int>();
  p.mlp.weight = matrix_from_json(j["mlp_weight"], "/mlp_weight");
  p.mlp.bias = j["mlp_bias"].get<std::vector<double>>();
  p.validate();
  return p;
}

inline void save_gsa_params(const GsaParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << gsa_params_to_json(p).dump(2) << '\n';
}

inline GsaParams load_gsa_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaViolation("/", std::string("malformed JSON: ") + e.what());
  }
  return gsa_params_from_json(j);
}

}  // namespace adkit

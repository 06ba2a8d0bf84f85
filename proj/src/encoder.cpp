#include "sparsepose/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsepose/kernels.hpp"
#include "sparsepose/rng.hpp"

namespace sparsepose {

namespace {

constexpr double kInitStd = 0.02;

Matrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.truncated_normal(kInitStd);
  return m;
}

std::vector<double> random_vector(SplitMix64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.truncated_normal(kInitStd);
  return v;
}

void require_finite(const Matrix& m, int layer) {
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw NumericError("non-finite activation after encoder layer " + std::to_string(layer));
  }
}

}  // namespace

void EncoderConfig::validate() const {
  if (channels <= 0 || heads <= 0 || channels % heads != 0)
    throw std::invalid_argument("encoder channels must be a positive multiple of heads");
  if (channels % 4 != 0) throw std::invalid_argument("encoder channels must be a multiple of 4");
  if (layers < 1) throw std::invalid_argument("encoder needs at least one layer");
  if (mlp_ratio < 1) throw std::invalid_argument("mlp_ratio must be >= 1");
  if (patch_size <= 0) throw std::invalid_argument("patch size must be positive");
}

TokenSequence::TokenSequence(Matrix features, std::vector<PatchIndex> positions)
    : features_(std::move(features)), positions_(std::move(positions)) {
  if (positions_.empty()) throw std::invalid_argument("token sequence must be non-empty");
  if (features_.rows() != positions_.size()) throw std::invalid_argument("token features/positions mismatch");
  for (std::size_t i = 1; i < positions_.size(); ++i) {
    if (positions_[i] <= positions_[i - 1]) throw std::invalid_argument("token positions must be strictly ascending");
  }
}

std::vector<double> sinusoid_code(int row, int col, int channels) {
  const int half = channels / 2;
  std::vector<double> code(static_cast<std::size_t>(channels));
  auto fill = [&](int pos, int base) {
    for (int i = 0; i < half / 2; ++i) {
      const double freq = std::pow(10000.0, -2.0 * i / half);
      code[static_cast<std::size_t>(base + 2 * i)] = std::sin(pos * freq);
      code[static_cast<std::size_t>(base + 2 * i + 1)] = std::cos(pos * freq);
    }
  };
  fill(row, 0);
  fill(col, half);
  return code;
}

EncoderWeights init_weights(const EncoderConfig& cfg, const PatchGrid& grid) {
  cfg.validate();
  if (cfg.patch_size != grid.patch_size()) throw std::invalid_argument("encoder and grid patch sizes differ");
  const auto c = static_cast<std::size_t>(cfg.channels);
  const auto hidden = static_cast<std::size_t>(cfg.hidden());
  const auto patch_dim = static_cast<std::size_t>(cfg.patch_size * cfg.patch_size * 3);

  SplitMix64 rng(cfg.seed);
  EncoderWeights w;
  w.config = cfg;
  w.grid = grid;
  w.patch_projection = random_matrix(rng, patch_dim, c);
  w.patch_bias = random_vector(rng, c);

  w.positional = Matrix(static_cast<std::size_t>(grid.size()), c);
  for (int p = 0; p < grid.size(); ++p) {
    const PatchCoord pc = unflatten(p, grid);
    const auto code = sinusoid_code(pc.y, pc.x, cfg.channels);
    std::copy(code.begin(), code.end(), w.positional.row(static_cast<std::size_t>(p)).begin());
  }

  w.layers.resize(static_cast<std::size_t>(cfg.layers));
  for (auto& l : w.layers) {
    l.norm1_scale.assign(c, 1.0);
    l.norm1_offset.assign(c, 0.0);
    l.query = random_matrix(rng, c, c);
    l.query_bias = random_vector(rng, c);
    l.key = random_matrix(rng, c, c);
    l.key_bias = random_vector(rng, c);
    l.value = random_matrix(rng, c, c);
    l.value_bias = random_vector(rng, c);
    l.output = random_matrix(rng, c, c);
    l.output_bias = random_vector(rng, c);
    l.norm2_scale.assign(c, 1.0);
    l.norm2_offset.assign(c, 0.0);
    l.ffn_in = random_matrix(rng, c, hidden);
    l.ffn_in_bias = random_vector(rng, hidden);
    l.ffn_out = random_matrix(rng, hidden, c);
    l.ffn_out_bias = random_vector(rng, c);
  }
  return w;
}

TokenSequence patch_embed(const Image& image, const EncoderWeights& w) {
  const PatchGrid& grid = w.grid;
  if (image.dim0() != static_cast<std::size_t>(grid.image_height()) ||
      image.dim1() != static_cast<std::size_t>(grid.image_width()) || image.dim2() != 3)
    throw std::invalid_argument("image is " + std::to_string(image.dim0()) + "x" + std::to_string(image.dim1()) +
                                "x" + std::to_string(image.dim2()) + ", expected " +
                                std::to_string(grid.image_height()) + "x" + std::to_string(grid.image_width()) +
                                "x3");
  const int p = grid.patch_size();
  Matrix patches(static_cast<std::size_t>(grid.size()), w.patch_projection.rows());
  const std::ptrdiff_t n = grid.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const PatchCoord pc = unflatten(static_cast<PatchIndex>(t), grid);
    auto dst = patches.row(static_cast<std::size_t>(t)).begin();
    for (int py = 0; py < p; ++py) {
      for (int px = 0; px < p; ++px) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
          *dst++ = image(static_cast<std::size_t>(pc.y * p + py), static_cast<std::size_t>(pc.x * p + px), ch);
        }
      }
    }
  }
  Matrix tokens;
  kernels::linear(patches, w.patch_projection, w.patch_bias, tokens);
  kernels::add_inplace(tokens, w.positional);

  std::vector<PatchIndex> positions(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) positions[static_cast<std::size_t>(i)] = i;
  return TokenSequence(std::move(tokens), std::move(positions));
}

TokenSequence gather(const TokenSequence& full, const PatchSet& selection) {
  const auto& pos = full.positions();
  Matrix out(selection.size(), full.channels());
  std::vector<PatchIndex> out_pos;
  out_pos.reserve(selection.size());
  std::size_t r = 0;
  for (PatchIndex p : selection) {
    auto it = std::lower_bound(pos.begin(), pos.end(), p);
    if (it == pos.end() || *it != p)
      throw std::out_of_range("selected patch " + std::to_string(p) + " is not in the token sequence");
    const auto src = full.features().row(static_cast<std::size_t>(it - pos.begin()));
    std::copy(src.begin(), src.end(), out.row(r++).begin());
    out_pos.push_back(p);
  }
  return TokenSequence(std::move(out), std::move(out_pos));
}

Matrix transformer_forward(const Matrix& tokens, const EncoderWeights& w) {
  const auto& cfg = w.config;
  if (tokens.cols() != static_cast<std::size_t>(cfg.channels))
    throw std::invalid_argument("token width does not match encoder channels");
  Matrix x = tokens;
  Matrix h, q, k, v, proj, ffn, ffn_out;
  int index = 0;
  for (const auto& l : w.layers) {
    kernels::layer_norm(x, l.norm1_scale, l.norm1_offset, h);
    kernels::linear(h, l.query, l.query_bias, q);
    kernels::linear(h, l.key, l.key_bias, k);
    kernels::linear(h, l.value, l.value_bias, v);
    const Matrix attended = kernels::multi_head_attention(q, k, v, cfg.heads);
    kernels::linear(attended, l.output, l.output_bias, proj);
    kernels::add_inplace(x, proj);

    kernels::layer_norm(x, l.norm2_scale, l.norm2_offset, h);
    kernels::linear(h, l.ffn_in, l.ffn_in_bias, ffn);
    kernels::gelu_inplace(ffn);
    kernels::linear(ffn, l.ffn_out, l.ffn_out_bias, ffn_out);
    kernels::add_inplace(x, ffn_out);
    require_finite(x, index++);
  }
  return x;
}

TokenSequence transformer_forward(const TokenSequence& tokens, const EncoderWeights& w) {
  return TokenSequence(transformer_forward(tokens.features(), w), tokens.positions());
}

}  // namespace sparsepose

#include "sparsepose/decoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sparsepose/kernels.hpp"
#include "sparsepose/rng.hpp"

namespace sparsepose {

namespace {

constexpr double kInitStd = 0.02;

std::vector<double> random_vector(SplitMix64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.truncated_normal(kInitStd);
  return v;
}

Tensor3 to_channel_major(const Featuremap& f) {
  Tensor3 out(f.dim2(), f.dim0(), f.dim1());
  for (std::size_t y = 0; y < f.dim0(); ++y)
    for (std::size_t x = 0; x < f.dim1(); ++x)
      for (std::size_t c = 0; c < f.dim2(); ++c) out(c, y, x) = f(y, x, c);
  return out;
}

}  // namespace

void DecoderConfig::validate() const {
  if (in_channels <= 0 || hidden <= 0) throw std::invalid_argument("decoder channel counts must be positive");
  if (keypoints < 0) throw std::invalid_argument("decoder keypoint count must be non-negative");
}

DecoderWeights init_decoder_weights(const DecoderConfig& cfg) {
  cfg.validate();
  const auto cin = static_cast<std::size_t>(cfg.in_channels);
  const auto d = static_cast<std::size_t>(cfg.hidden);
  const auto k = static_cast<std::size_t>(cfg.keypoints);
  const std::size_t taps = kDeconvKernel * kDeconvKernel;

  SplitMix64 rng(cfg.seed);
  DecoderWeights w;
  w.config = cfg;
  w.deconv1 = random_vector(rng, cin * d * taps);
  w.bn1_mean.assign(d, 0.0);
  w.bn1_var.assign(d, 1.0);
  w.bn1_gamma.assign(d, 1.0);
  w.bn1_beta.assign(d, 0.0);
  w.deconv2 = random_vector(rng, d * d * taps);
  w.bn2_mean.assign(d, 0.0);
  w.bn2_var.assign(d, 1.0);
  w.bn2_gamma.assign(d, 1.0);
  w.bn2_beta.assign(d, 0.0);
  w.head = Matrix(k, d);
  for (double& v : w.head.data()) v = rng.truncated_normal(kInitStd);
  w.head_bias = random_vector(rng, k);
  return w;
}

Featuremap scatter_zero_fill(const TokenSequence& tokens, const PatchGrid& grid) {
  Featuremap f(static_cast<std::size_t>(grid.rows()), static_cast<std::size_t>(grid.cols()), tokens.channels());
  std::vector<bool> seen(static_cast<std::size_t>(grid.size()), false);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const PatchIndex p = tokens.positions()[i];
    const PatchCoord c = unflatten(p, grid);
    if (seen[static_cast<std::size_t>(p)]) throw std::invalid_argument("duplicate token position " + std::to_string(p));
    seen[static_cast<std::size_t>(p)] = true;
    const auto src = tokens.features().row(i);
    for (std::size_t ch = 0; ch < src.size(); ++ch)
      f(static_cast<std::size_t>(c.y), static_cast<std::size_t>(c.x), ch) = src[ch];
  }
  return f;
}

DecoderTrace decode_head_trace(const Featuremap& f, const DecoderWeights& w) {
  const auto& cfg = w.config;
  if (f.dim2() != static_cast<std::size_t>(cfg.in_channels))
    throw std::invalid_argument("featuremap has " + std::to_string(f.dim2()) + " channels, decoder expects " +
                                std::to_string(cfg.in_channels));
  const auto d = static_cast<std::size_t>(cfg.hidden);
  DecoderTrace t;
  t.block1 = kernels::conv_transpose2d(to_channel_major(f), w.deconv1, d, kDeconvKernel, kDeconvStride, kDeconvPad);
  kernels::batch_norm_relu_inplace(t.block1, w.bn1_mean, w.bn1_var, w.bn1_gamma, w.bn1_beta);
  t.block2 = kernels::conv_transpose2d(t.block1, w.deconv2, d, kDeconvKernel, kDeconvStride, kDeconvPad);
  kernels::batch_norm_relu_inplace(t.block2, w.bn2_mean, w.bn2_var, w.bn2_gamma, w.bn2_beta);
  t.heatmap = kernels::conv1x1(t.block2, w.head, w.head_bias);
  return t;
}

Heatmap decode_head(const Featuremap& f, const DecoderWeights& w) { return decode_head_trace(f, w).heatmap; }

Heatmap gaussian_target(const KeypointPrediction& kp, std::size_t height, std::size_t width, double sigma,
                        double stride) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
  Heatmap h(kp.size(), height, width);
  const double denom = 2.0 * sigma * sigma;
  for (std::size_t k = 0; k < kp.size(); ++k) {
    if (!kp[k].visible) continue;
    const double cu = kp[k].x / stride;
    const double cv = kp[k].y / stride;
    for (std::size_t v = 0; v < height; ++v) {
      const double dv = static_cast<double>(v) + 0.5 - cv;
      for (std::size_t u = 0; u < width; ++u) {
        const double du = static_cast<double>(u) + 0.5 - cu;
        h(k, v, u) = std::exp(-(du * du + dv * dv) / denom);
      }
    }
  }
  return h;
}

KeypointPrediction decode_heatmap(const Heatmap& h, double stride) {
  if (h.dim0() == 0 || h.dim1() == 0 || h.dim2() == 0) throw std::invalid_argument("empty heatmap");
  std::vector<Keypoint> points(h.dim0());
  for (std::size_t k = 0; k < h.dim0(); ++k) {
    std::size_t best_v = 0, best_u = 0;
    double best = h(k, 0, 0);
    for (std::size_t v = 0; v < h.dim1(); ++v) {
      for (std::size_t u = 0; u < h.dim2(); ++u) {
        if (h(k, v, u) > best) {
          best = h(k, v, u);
          best_v = v;
          best_u = u;
        }
      }
    }
    if (!std::isfinite(best)) throw std::invalid_argument("heatmap contains non-finite values");
    points[k] = {(static_cast<double>(best_u) + 0.5) * stride, (static_cast<double>(best_v) + 0.5) * stride, true,
                 best};
  }
  return KeypointPrediction(std::move(points));
}

}  // namespace sparsepose

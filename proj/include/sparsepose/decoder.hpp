#pragma once

#include <cstdint>
#include <vector>

#include "sparsepose/encoder.hpp"
#include "sparsepose/grid.hpp"
#include "sparsepose/tensor.hpp"

namespace sparsepose {

/// Featuremap: (rows, cols, C). Heatmap: (K, 4*rows, 4*cols).
using Featuremap = Tensor3;
using Heatmap = Tensor3;

/// Geometry of each upsampling block.
inline constexpr int kDeconvKernel = 4;
inline constexpr int kDeconvStride = 2;
inline constexpr int kDeconvPad = 1;
/// Pixels per heatmap cell for 16-pixel patches (two 2x upsampling blocks).
inline constexpr double kHeatmapStride = 4.0;

struct DecoderConfig {
  int in_channels = 64;
  int hidden = 32;
  int keypoints = 17;
  std::uint64_t seed = 1;

  void validate() const;
};

struct DecoderWeights {
  DecoderConfig config;
  // Transposed-conv kernels laid out [in][out][kernel][kernel].
  std::vector<double> deconv1, deconv2;
  std::vector<double> bn1_mean, bn1_var, bn1_gamma, bn1_beta;
  std::vector<double> bn2_mean, bn2_var, bn2_gamma, bn2_beta;
  Matrix head;  // K x hidden
  std::vector<double> head_bias;
};

/// Seeded initialisation. Normalisation runs with fixed inference
/// statistics (mean 0, variance 1), unit scale and zero offset. The head
/// bias is random so channels are distinguishable.
DecoderWeights init_decoder_weights(const DecoderConfig& cfg);

/// Places each token's features at its grid cell; every other cell is zero.
Featuremap scatter_zero_fill(const TokenSequence& tokens, const PatchGrid& grid);

struct DecoderTrace {
  Tensor3 block1;  // (hidden, 2*rows, 2*cols), post-ReLU
  Tensor3 block2;  // (hidden, 4*rows, 4*cols), post-ReLU
  Heatmap heatmap;
};

DecoderTrace decode_head_trace(const Featuremap& f, const DecoderWeights& w);
Heatmap decode_head(const Featuremap& f, const DecoderWeights& w);

/// Gaussian targets evaluated at heatmap cell centres (i + 0.5), with the
/// keypoint at pixel / stride. Invisible keypoints give all-zero channels.
Heatmap gaussian_target(const KeypointPrediction& kp, std::size_t height, std::size_t width, double sigma = 2.0,
                        double stride = kHeatmapStride);

/// Argmax per channel (first row-major occurrence on ties) mapped to pixels
/// as (index + 0.5) * stride. The peak value is returned as the score.
KeypointPrediction decode_heatmap(const Heatmap& h, double stride = kHeatmapStride);

}  // namespace sparsepose

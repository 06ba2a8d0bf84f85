#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sparsepose/grid.hpp"
#include "sparsepose/tensor.hpp"

namespace sparsepose {

/// Raised when a forward pass produces a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EncoderConfig {
  int channels = 64;
  int layers = 4;
  int heads = 4;
  int mlp_ratio = 4;
  int patch_size = 16;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  int head_dim() const { return channels / heads; }
  int hidden() const { return channels * mlp_ratio; }
};

/// Token features paired with their flat patch indices (strictly ascending).
class TokenSequence {
 public:
  TokenSequence(Matrix features, std::vector<PatchIndex> positions);

  std::size_t size() const { return positions_.size(); }
  std::size_t channels() const { return features_.cols(); }
  const Matrix& features() const { return features_; }
  const std::vector<PatchIndex>& positions() const { return positions_; }

 private:
  Matrix features_;
  std::vector<PatchIndex> positions_;
};

struct EncoderLayerWeights {
  std::vector<double> norm1_scale, norm1_offset;
  Matrix query, key, value, output;  // C x C
  std::vector<double> query_bias, key_bias, value_bias, output_bias;
  std::vector<double> norm2_scale, norm2_offset;
  Matrix ffn_in;  // C x hidden
  std::vector<double> ffn_in_bias;
  Matrix ffn_out;  // hidden x C
  std::vector<double> ffn_out_bias;
};

struct EncoderWeights {
  EncoderConfig config;
  PatchGrid grid{16, 16, 16};
  Matrix patch_projection;  // (P*P*3) x C, input order (row, col, channel)
  std::vector<double> patch_bias;
  Matrix positional;  // (rows*cols) x C
  std::vector<EncoderLayerWeights> layers;
};

/// 2-D sinusoidal code: the first C/2 channels encode the row, the rest the
/// column, each as interleaved (sin, cos) pairs at geometric frequencies.
std::vector<double> sinusoid_code(int row, int col, int channels);

/// Seeded initialisation: linear weights and biases from a +-2 sigma
/// truncated normal (sigma 0.02), norm scales 1, offsets 0.
EncoderWeights init_weights(const EncoderConfig& cfg, const PatchGrid& grid);

/// Embeds every patch of a (H, W, 3) image; tokens ordered by flat index.
TokenSequence patch_embed(const Image& image, const EncoderWeights& w);

/// Restricts the sequence to the selected positions, preserving order.
TokenSequence gather(const TokenSequence& full, const PatchSet& selection);

/// Runs the pre-norm transformer stack on a token matrix (N x C). Row order
/// is arbitrary; attention is permutation-equivariant.
Matrix transformer_forward(const Matrix& tokens, const EncoderWeights& w);

TokenSequence transformer_forward(const TokenSequence& tokens, const EncoderWeights& w);

}  // namespace sparsepose

#pragma once

// Serial, dense, loop-by-loop implementation of the full model. It shares
// weights with the optimised path but no code: no kernels, no token
// selection, no scatter. Tests and the kernel benchmark compare against it.

#include "sparsepose/decoder.hpp"
#include "sparsepose/encoder.hpp"

namespace sparsepose::reference {

Matrix patch_embed(const Image& image, const EncoderWeights& w);

Matrix transformer_forward(const Matrix& tokens, const EncoderWeights& w);

/// Scatter-form transposed convolutions, then the 1x1 head.
Heatmap decode_head(const Featuremap& f, const DecoderWeights& w);

/// Image -> heatmap over every patch.
Heatmap dense_pipeline(const Image& image, const EncoderWeights& ew, const DecoderWeights& dw);

}  // namespace sparsepose::reference

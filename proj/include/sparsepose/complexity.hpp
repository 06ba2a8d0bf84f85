#pragma once

#include <span>
#include <string>
#include <string_view>

#include "sparsepose/decoder.hpp"
#include "sparsepose/encoder.hpp"
#include "sparsepose/grid.hpp"
#include "sparsepose/selection.hpp"

namespace sparsepose {

/// Operation counts in multiply-accumulates (1 MAC = 1 FLOP). Norms,
/// softmax and activations are not counted.
struct FlopReport {
  double token_count = 0;
  double embed_flops = 0;
  double per_layer_attention_flops = 0;
  double per_layer_ffn_flops = 0;
  double encoder_flops = 0;
  double decoder_flops = 0;
  double total_flops = 0;
};

/// Patch embedding plus L transformer layers over n_tokens tokens:
///   attention = 4 N C^2 + 2 N^2 C, ffn = 2 r N C^2, embed = N P^2 3 C.
/// decoder_flops is left at zero.
FlopReport encoder_flops(const EncoderConfig& cfg, double n_tokens);

/// Both transposed-conv blocks (input area x C_in x C_out x kernel^2 each)
/// plus the 1x1 head, over the dense featuremap.
double decoder_flops(const DecoderConfig& cfg, const PatchGrid& grid);

/// encoder_flops with the decoder term filled in.
FlopReport pipeline_flops(const EncoderConfig& enc, const DecoderConfig& dec, const PatchGrid& grid,
                          double n_tokens);

/// Mean selected-token count over a corpus of guide predictions.
double effective_tokens(std::span<const KeypointPrediction> corpus, const SelectionConfig& cfg,
                        const PatchGrid& grid);

/// Real-valued N at which the encoder (layers only, no embedding) costs
/// target_flops. Solved by bisection on the monotone cost curve.
double tokens_for_encoder_flops(const EncoderConfig& cfg, double target_flops);

struct ModelSpec {
  std::string name;
  EncoderConfig encoder;
  DecoderConfig decoder;
  PatchGrid grid{256, 192, 16};
};

/// "vitb" (C=768, L=12), "vitl" (C=1024, L=24) or "toy" (C=64, L=4), all at
/// 256x192 input with 17 keypoints.
ModelSpec model_preset(std::string_view name);

}  // namespace sparsepose

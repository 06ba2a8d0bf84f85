#include "sparsepose/complexity.hpp"

#include <stdexcept>

namespace sparsepose {

FlopReport encoder_flops(const EncoderConfig& cfg, double n_tokens) {
  cfg.validate();
  if (!(n_tokens >= 1.0)) throw std::invalid_argument("token count must be >= 1");
  const double n = n_tokens;
  const double c = cfg.channels;
  const double p = cfg.patch_size;

  FlopReport r;
  r.token_count = n;
  r.embed_flops = n * (p * p * 3.0) * c;
  r.per_layer_attention_flops = 4.0 * n * c * c + 2.0 * n * n * c;
  r.per_layer_ffn_flops = 2.0 * cfg.mlp_ratio * n * c * c;
  r.encoder_flops = cfg.layers * (r.per_layer_attention_flops + r.per_layer_ffn_flops);
  r.decoder_flops = 0.0;
  r.total_flops = r.embed_flops + r.encoder_flops + r.decoder_flops;
  return r;
}

double decoder_flops(const DecoderConfig& cfg, const PatchGrid& grid) {
  cfg.validate();
  const double taps = static_cast<double>(kDeconvKernel) * kDeconvKernel;
  const double area0 = static_cast<double>(grid.rows()) * grid.cols();
  const double area1 = area0 * kDeconvStride * kDeconvStride;
  const double area2 = area1 * kDeconvStride * kDeconvStride;
  const double block1 = area0 * cfg.in_channels * cfg.hidden * taps;
  const double block2 = area1 * cfg.hidden * cfg.hidden * taps;
  const double head = area2 * cfg.hidden * cfg.keypoints;
  return block1 + block2 + head;
}

FlopReport pipeline_flops(const EncoderConfig& enc, const DecoderConfig& dec, const PatchGrid& grid,
                          double n_tokens) {
  if (enc.channels != dec.in_channels) throw std::invalid_argument("encoder/decoder channel mismatch");
  FlopReport r = encoder_flops(enc, n_tokens);
  r.decoder_flops = decoder_flops(dec, grid);
  r.total_flops = r.embed_flops + r.encoder_flops + r.decoder_flops;
  return r;
}

double effective_tokens(std::span<const KeypointPrediction> corpus, const SelectionConfig& cfg,
                        const PatchGrid& grid) {
  if (corpus.empty()) throw std::invalid_argument("effective_tokens needs a non-empty corpus");
  double sum = 0.0;
  for (const auto& kp : corpus) sum += static_cast<double>(select(kp, grid, cfg).size());
  return sum / static_cast<double>(corpus.size());
}

double tokens_for_encoder_flops(const EncoderConfig& cfg, double target_flops) {
  auto cost = [&](double n) { return encoder_flops(cfg, n).encoder_flops; };
  if (!(target_flops >= cost(1.0))) throw std::invalid_argument("target below the one-token encoder cost");
  double lo = 1.0, hi = 2.0;
  while (cost(hi) < target_flops) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cost(mid) < target_flops ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ModelSpec model_preset(std::string_view name) {
  ModelSpec m;
  m.name = std::string(name);
  if (name == "vitb") {
    m.encoder = {.channels = 768, .layers = 12, .heads = 12, .mlp_ratio = 4, .patch_size = 16, .seed = 0};
    m.decoder = {.in_channels = 768, .hidden = 256, .keypoints = 17, .seed = 1};
  } else if (name == "vitl") {
    m.encoder = {.channels = 1024, .layers = 24, .heads = 16, .mlp_ratio = 4, .patch_size = 16, .seed = 0};
    m.decoder = {.in_channels = 1024, .hidden = 256, .keypoints = 17, .seed = 1};
  } else if (name == "toy") {
    m.encoder = {.channels = 64, .layers = 4, .heads = 4, .mlp_ratio = 4, .patch_size = 16, .seed = 0};
    m.decoder = {.in_channels = 64, .hidden = 32, .keypoints = 17, .seed = 1};
  } else {
    throw std::invalid_argument("unknown model preset '" + std::string(name) + "' (expected vitb, vitl or toy)");
  }
  return m;
}

}  // namespace sparsepose

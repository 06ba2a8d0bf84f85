#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsepose/complexity.hpp"
#include "sparsepose/decoder.hpp"
#include "sparsepose/encoder.hpp"
#include "sparsepose/grid.hpp"
#include "sparsepose/selection.hpp"

namespace sparsepose {

struct PipelineConfig {
  PatchGrid grid{256, 192, 16};
  EncoderConfig encoder;
  DecoderConfig decoder;
  SelectionConfig selection;
  double sigma = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// {"method", "n", "skeleton_neighbors", "include_invisible", "pairs"}; all optional.
SelectionConfig selection_config_from_json(const nlohmann::json& j);

/// JSON mirror of PipelineConfig. Missing keys keep their defaults.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& cfg);

struct PipelineResult {
  PatchSet selection;
  Featuremap featuremap;
  Heatmap heatmap;
  KeypointPrediction keypoints;
  FlopReport flops;
};

/// Weights are built once from the config seeds and reused across images.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);

  const PipelineConfig& config() const { return cfg_; }
  const EncoderWeights& encoder_weights() const { return encoder_; }
  const DecoderWeights& decoder_weights() const { return decoder_; }

  /// select -> embed -> gather -> transformer -> zero-fill -> head -> argmax.
  PipelineResult run(const Image& image, const KeypointPrediction& guide) const;

  /// Same stages with a caller-supplied selection.
  PipelineResult run_with_selection(const Image& image, const PatchSet& selection) const;

 private:
  PipelineConfig cfg_;
  EncoderWeights encoder_;
  DecoderWeights decoder_;
};

PipelineResult run_pipeline(const Image& image, const KeypointPrediction& guide, const PipelineConfig& cfg);

struct SyntheticSample {
  Image image;
  KeypointPrediction keypoints;
  SkeletonPairs pairs;
};

/// Articulated stick figure on a noise background. K = 17 uses the COCO
/// joint layout and coco17_skeleton(); other K >= 2 give a jointed chain.
SyntheticSample synth_pose(std::uint64_t seed, const PatchGrid& grid, int num_keypoints = 17);

/// Adds N(0, sigma_noise^2) pixel noise to each visible keypoint, clamped to
/// [0, W-1] x [0, H-1].
KeypointPrediction noisy_oracle(const KeypointPrediction& gt, double sigma_noise, std::uint64_t seed,
                                const PatchGrid& grid);

/// Fraction of visible ground-truth joint patches contained in the selection.
double joint_coverage(const KeypointPrediction& gt, const PatchSet& selection, const PatchGrid& grid);

struct BenchConfig {
  std::vector<int> n_values;
  int samples = 100;
  double sigma_noise = 6.0;
  std::string model = "toy";
  SelectionMethod method = SelectionMethod::Neighbors;
  bool skeleton_neighbors = true;
  std::uint64_t seed = 0;
  /// Runs the full forward pass per sample and records wall time. Off by
  /// default so the CSV is byte-reproducible.
  bool timing = false;
};

struct BenchRow {
  int n = 0;
  double avg_tokens = 0;
  double gflops = 0;
  double coverage = 0;
  double wall_time_ms = 0;
};

std::vector<BenchRow> bench_sweep(const BenchConfig& cfg);
std::string bench_csv(const std::vector<BenchRow>& rows);

/// Patch grid and selection roles drawn over the image: joint red, neighbour
/// orange, skeleton blue, unpruned (method none) green.
Image render_overlay(const Image& image, const KeypointPrediction& kp, const PatchGrid& grid,
                     const SelectionConfig& cfg);

}  // namespace sparsepose

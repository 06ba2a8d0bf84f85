#pragma once

#include <span>
#include <vector>

#include "sparsepose/grid.hpp"

namespace sparsepose {

/// Per-keypoint falloff k_i and object scale s (sqrt of object area).
struct OksParams {
  std::vector<double> falloff;
  double scale = 1.0;

  void validate(std::size_t num_keypoints) const;
};

/// The 17 standard COCO keypoint sigmas.
std::vector<double> coco17_sigmas();

/// Falloff constants k_i = 2 * sigma_i, matching the COCO evaluator.
std::vector<double> falloff_from_sigmas(std::span<const double> sigmas);

/// Mean over visible ground-truth keypoints of exp(-d^2 / (2 s^2 k^2)).
/// Throws if no ground-truth keypoint is visible.
double oks(const KeypointPrediction& pred, const KeypointPrediction& gt, const OksParams& params);

/// Percentage of visible ground-truth keypoints within tau * head_size
/// pixels. A distance exactly at the threshold counts as correct.
double pckh(const KeypointPrediction& pred, const KeypointPrediction& gt, double head_size, double tau = 0.5);

/// 0.50, 0.55, ..., 0.95.
std::vector<double> coco_oks_thresholds();

/// Mean over thresholds of the fraction of instances with OKS >= threshold.
/// One instance per image; there is no detection matching.
double average_precision(std::span<const double> scores, std::span<const double> thresholds);
inline double average_precision(std::span<const double> scores) {
  return average_precision(scores, coco_oks_thresholds());
}

struct MatchResult {
  std::vector<double> scores;
  double ap = 0.0;
};

/// Scores each (prediction, ground truth) instance with its own object
/// scale, then averages precision over the COCO thresholds.
MatchResult evaluate_oks(std::span<const KeypointPrediction> preds, std::span<const KeypointPrediction> gts,
                         std::span<const double> falloff, std::span<const double> scales);

}  // namespace sparsepose

#include "sparsepose/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace sparsepose {

namespace {

void check_pair(const KeypointPrediction& pred, const KeypointPrediction& gt) {
  if (pred.size() != gt.size()) throw std::invalid_argument("prediction and ground truth differ in keypoint count");
  if (gt.visible_count() == 0) throw std::domain_error("ground truth has no visible keypoints; score is undefined");
}

}  // namespace

void OksParams::validate(std::size_t num_keypoints) const {
  if (falloff.size() != num_keypoints) throw std::invalid_argument("OKS falloff count does not match keypoints");
  for (double k : falloff) {
    if (!(k > 0.0)) throw std::invalid_argument("OKS falloff constants must be positive");
  }
  if (!(scale > 0.0)) throw std::invalid_argument("OKS object scale must be positive");
}

std::vector<double> coco17_sigmas() {
  return {0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072,
          0.062, 0.062, 0.107, 0.107, 0.087, 0.087, 0.089, 0.089};
}

std::vector<double> falloff_from_sigmas(std::span<const double> sigmas) {
  std::vector<double> k(sigmas.begin(), sigmas.end());
  for (double& v : k) v *= 2.0;
  return k;
}

double oks(const KeypointPrediction& pred, const KeypointPrediction& gt, const OksParams& params) {
  check_pair(pred, gt);
  params.validate(gt.size());
  const double s2 = params.scale * params.scale;
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt[i].visible) continue;
    const double dx = pred[i].x - gt[i].x;
    const double dy = pred[i].y - gt[i].y;
    const double k2 = params.falloff[i] * params.falloff[i];
    sum += std::exp(-(dx * dx + dy * dy) / (2.0 * s2 * k2));
  }
  return sum / static_cast<double>(gt.visible_count());
}

double pckh(const KeypointPrediction& pred, const KeypointPrediction& gt, double head_size, double tau) {
  check_pair(pred, gt);
  if (!(head_size > 0.0)) throw std::invalid_argument("head size must be positive");
  const double limit = tau * head_size;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt[i].visible) continue;
    if (std::hypot(pred[i].x - gt[i].x, pred[i].y - gt[i].y) <= limit) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(gt.visible_count());
}

std::vector<double> coco_oks_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

double average_precision(std::span<const double> scores, std::span<const double> thresholds) {
  if (scores.empty()) throw std::invalid_argument("average_precision needs at least one score");
  if (thresholds.empty()) throw std::invalid_argument("average_precision needs at least one threshold");
  double sum = 0.0;
  for (double t : thresholds) {
    std::size_t pass = 0;
    for (double s : scores) pass += s >= t ? 1 : 0;
    sum += static_cast<double>(pass) / static_cast<double>(scores.size());
  }
  return sum / static_cast<double>(thresholds.size());
}

MatchResult evaluate_oks(std::span<const KeypointPrediction> preds, std::span<const KeypointPrediction> gts,
                         std::span<const double> falloff, std::span<const double> scales) {
  if (preds.size() != gts.size() || gts.size() != scales.size())
    throw std::invalid_argument("evaluate_oks: prediction, ground-truth and scale counts differ");
  MatchResult r;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const OksParams params{std::vector<double>(falloff.begin(), falloff.end()), scales[i]};
    r.scores.push_back(oks(preds[i], gts[i], params));
  }
  r.ap = average_precision(r.scores);
  return r;
}

}  // namespace sparsepose

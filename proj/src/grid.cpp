#include "sparsepose/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sparsepose {

PatchGrid::PatchGrid(int image_height, int image_width, int patch_size)
    : image_height_(image_height), image_width_(image_width), patch_size_(patch_size) {
  if (patch_size <= 0) throw std::invalid_argument("patch size must be positive");
  if (image_height < patch_size || image_width < patch_size)
    throw std::invalid_argument("image smaller than one patch");
  if (image_height % patch_size != 0 || image_width % patch_size != 0)
    throw std::invalid_argument("image dimensions " + std::to_string(image_height) + "x" +
                                std::to_string(image_width) + " are not multiples of patch size " +
                                std::to_string(patch_size));
}

KeypointPrediction::KeypointPrediction(std::vector<Keypoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("keypoint prediction must hold at least one point");
  for (const auto& p : points_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument("keypoint coordinates must be finite");
  }
}

std::size_t KeypointPrediction::visible_count() const {
  return static_cast<std::size_t>(
      std::count_if(points_.begin(), points_.end(), [](const Keypoint& k) { return k.visible; }));
}

PatchSet::PatchSet(std::vector<PatchIndex> indices, const PatchGrid& grid) : indices_(std::move(indices)) {
  for (PatchIndex p : indices_) {
    if (p < 0 || p >= grid.size())
      throw std::out_of_range("patch index " + std::to_string(p) + " outside grid of " +
                              std::to_string(grid.size()));
  }
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

PatchSet PatchSet::all(const PatchGrid& grid) {
  std::vector<PatchIndex> idx(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
  return PatchSet(std::move(idx), grid);
}

bool PatchSet::contains(PatchIndex p) const {
  return std::binary_search(indices_.begin(), indices_.end(), p);
}

SkeletonPairs::SkeletonPairs(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {
  for (const auto& [a, b] : pairs_) {
    if (a < 0 || b < 0) throw std::invalid_argument("skeleton joint index must be non-negative");
    if (a == b) throw std::invalid_argument("skeleton pair joins a joint to itself");
  }
}

void SkeletonPairs::validate(std::size_t num_keypoints) const {
  for (const auto& [a, b] : pairs_) {
    if (static_cast<std::size_t>(a) >= num_keypoints || static_cast<std::size_t>(b) >= num_keypoints)
      throw std::out_of_range("skeleton pair (" + std::to_string(a) + "," + std::to_string(b) +
                              ") references a joint beyond K=" + std::to_string(num_keypoints));
  }
}

SkeletonPairs coco17_skeleton() {
  return SkeletonPairs({
      {0, 1}, {0, 2}, {1, 3}, {2, 4},                     // head
      {5, 7}, {7, 9}, {6, 8}, {8, 10},                    // arms
      {5, 6}, {5, 11}, {6, 12}, {11, 12},                 // torso
      {11, 13}, {13, 15}, {12, 14}, {14, 16},             // legs
  });
}

PatchCoord to_patch_coord(double px, double py, const PatchGrid& grid) {
  const double p = grid.patch_size();
  // Clamp in floating point first so huge guide outputs cannot overflow int.
  const double cx = std::clamp(std::floor(px / p), 0.0, static_cast<double>(grid.cols() - 1));
  const double cy = std::clamp(std::floor(py / p), 0.0, static_cast<double>(grid.rows() - 1));
  return {static_cast<int>(cx), static_cast<int>(cy)};
}

PatchIndex flatten(PatchCoord c, const PatchGrid& grid) {
  if (!in_bounds(c, grid))
    throw std::out_of_range("patch coord (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                            ") outside grid");
  return c.y * grid.cols() + c.x;
}

PatchCoord unflatten(PatchIndex index, const PatchGrid& grid) {
  if (index < 0 || index >= grid.size())
    throw std::out_of_range("flat patch index " + std::to_string(index) + " outside grid");
  return {index % grid.cols(), index / grid.cols()};
}

}  // namespace sparsepose

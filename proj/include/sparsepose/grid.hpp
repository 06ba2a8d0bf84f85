#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sparsepose {

using PatchIndex = int;

/// Image-to-patch coordinate system. Image dimensions must be exact
/// multiples of the patch size; there is no implicit padding.
class PatchGrid {
 public:
  PatchGrid(int image_height, int image_width, int patch_size = 16);

  int image_height() const { return image_height_; }
  int image_width() const { return image_width_; }
  int patch_size() const { return patch_size_; }
  int rows() const { return image_height_ / patch_size_; }
  int cols() const { return image_width_ / patch_size_; }
  int size() const { return rows() * cols(); }

  bool operator==(const PatchGrid&) const = default;

 private:
  int image_height_;
  int image_width_;
  int patch_size_;
};

/// Column (x) and row (y) of a patch.
struct PatchCoord {
  int x = 0;
  int y = 0;

  bool operator==(const PatchCoord&) const = default;
};

inline bool in_bounds(PatchCoord c, const PatchGrid& grid) {
  return c.x >= 0 && c.y >= 0 && c.x < grid.cols() && c.y < grid.rows();
}

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  bool visible = true;
  double score = 1.0;
};

/// Guide-network output: K keypoints in pixel units.
class KeypointPrediction {
 public:
  KeypointPrediction() = default;
  explicit KeypointPrediction(std::vector<Keypoint> points);

  std::size_t size() const { return points_.size(); }
  const Keypoint& operator[](std::size_t k) const { return points_[k]; }
  Keypoint& operator[](std::size_t k) { return points_[k]; }
  std::span<const Keypoint> points() const { return points_; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  std::size_t visible_count() const;

 private:
  std::vector<Keypoint> points_;
};

/// Sorted, duplicate-free set of flat patch indices.
class PatchSet {
 public:
  PatchSet() = default;
  /// Sorts and deduplicates; every index must lie in [0, grid.size()).
  PatchSet(std::vector<PatchIndex> indices, const PatchGrid& grid);

  static PatchSet all(const PatchGrid& grid);

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(PatchIndex p) const;
  std::span<const PatchIndex> indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  bool operator==(const PatchSet&) const = default;

 private:
  std::vector<PatchIndex> indices_;
};

/// Undirected limb list over keypoint indices.
class SkeletonPairs {
 public:
  using Pair = std::pair<int, int>;

  SkeletonPairs() = default;
  explicit SkeletonPairs(std::vector<Pair> pairs);

  /// Throws if any index is >= num_keypoints.
  void validate(std::size_t num_keypoints) const;

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }
  const std::vector<Pair>& pairs() const { return pairs_; }

  bool operator==(const SkeletonPairs&) const = default;

 private:
  std::vector<Pair> pairs_;
};

/// 16-limb skeleton over the 17 COCO keypoints (head, arms, torso, legs).
SkeletonPairs coco17_skeleton();

// floor(pixel / P), clamped into the grid.
PatchCoord to_patch_coord(double px, double py, const PatchGrid& grid);
inline PatchCoord to_patch_coord(const Keypoint& kp, const PatchGrid& grid) {
  return to_patch_coord(kp.x, kp.y, grid);
}

PatchIndex flatten(PatchCoord c, const PatchGrid& grid);
PatchCoord unflatten(PatchIndex index, const PatchGrid& grid);

}  // namespace sparsepose

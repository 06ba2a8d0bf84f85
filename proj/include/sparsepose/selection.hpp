#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "sparsepose/grid.hpp"

namespace sparsepose {

/// Number of neighbouring patches added per keypoint, not counting the
/// keypoint's own patch.
class NeighborBudget {
 public:
  constexpr NeighborBudget() = default;
  explicit NeighborBudget(int n);
  constexpr int value() const { return n_; }

 private:
  int n_ = 0;
};

enum class SelectionMethod { None, Neighbors, Skeleton };

SelectionMethod parse_selection_method(std::string_view name);
std::string_view to_string(SelectionMethod m);

struct SelectionConfig {
  SelectionMethod method = SelectionMethod::Neighbors;
  NeighborBudget budget{7};
  bool include_joint_neighbors_in_skeleton = true;
  /// Keypoints flagged invisible are skipped unless this is set.
  bool include_invisible = false;
  SkeletonPairs pairs = coco17_skeleton();
};

/// 4-neighbourhood in the fixed order (x,y+1), (x,y-1), (x-1,y), (x+1,y),
/// with out-of-grid entries dropped.
std::vector<PatchCoord> neighbors4(PatchCoord c, const PatchGrid& grid);

/// Breadth-first joint + neighbour selection. Keypoints are processed in
/// order and the claimed set is shared: a patch taken by an earlier keypoint
/// is never re-added or counted, though later searches may pass through it.
/// Each keypoint therefore adds n new patches until the grid is full.
PatchSet select_joint_patches(const KeypointPrediction& kp, const PatchGrid& grid, NeighborBudget n,
                              bool include_invisible = false);

/// Integer line from start to end, both included, one patch per unit step
/// along the dominant axis. In the first octant this is the classic
/// error-accumulation rule with eps0 = 2dy - dx and increment on eps >= 0;
/// other octants are reached by axis swap and sign reflection.
std::vector<PatchCoord> bresenham(PatchCoord start, PatchCoord end);

/// Joint patches, plus the rasterised segment of every pair whose endpoints
/// are both visible, plus (optionally) the neighbour expansion with budget n.
PatchSet select_skeleton_patches(const KeypointPrediction& kp, const SkeletonPairs& pairs,
                                 const PatchGrid& grid, NeighborBudget n, const SelectionConfig& cfg);

PatchSet select(const KeypointPrediction& kp, const PatchGrid& grid, const SelectionConfig& cfg);

/// Why a patch was selected. Joint wins over Neighbor wins over Skeleton.
enum class PatchRole : std::uint8_t { Unselected, Joint, Neighbor, Skeleton, Dense };

/// One role per flat patch index. The non-Unselected entries are exactly
/// select(kp, grid, cfg).
std::vector<PatchRole> label_patches(const KeypointPrediction& kp, const PatchGrid& grid,
                                     const SelectionConfig& cfg);

}  // namespace sparsepose

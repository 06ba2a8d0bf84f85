#include "sparsepose/selection.hpp"

#include <cstdlib>
#include <deque>
#include <stdexcept>
#include <string>

namespace sparsepose {

NeighborBudget::NeighborBudget(int n) : n_(n) {
  if (n < 0) throw std::invalid_argument("neighbor budget must be non-negative, got " + std::to_string(n));
}

SelectionMethod parse_selection_method(std::string_view name) {
  if (name == "none") return SelectionMethod::None;
  if (name == "neighbors") return SelectionMethod::Neighbors;
  if (name == "skeleton") return SelectionMethod::Skeleton;
  throw std::invalid_argument("unknown selection method '" + std::string(name) + "'");
}

std::string_view to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::None: return "none";
    case SelectionMethod::Neighbors: return "neighbors";
    case SelectionMethod::Skeleton: return "skeleton";
  }
  return "?";
}

std::vector<PatchCoord> neighbors4(PatchCoord c, const PatchGrid& grid) {
  const PatchCoord candidates[4] = {{c.x, c.y + 1}, {c.x, c.y - 1}, {c.x - 1, c.y}, {c.x + 1, c.y}};
  std::vector<PatchCoord> out;
  out.reserve(4);
  for (const auto& n : candidates) {
    if (in_bounds(n, grid)) out.push_back(n);
  }
  return out;
}

namespace {

// Per-keypoint BFS. Traversal is local to each keypoint, while the claimed
// set is shared: a patch already taken by an earlier keypoint is walked
// through but neither re-added nor counted against this keypoint's budget.
void expand_joints(const KeypointPrediction& kp, const PatchGrid& grid, NeighborBudget n,
                   bool include_invisible, std::vector<PatchRole>& roles) {
  std::deque<PatchCoord> queue;
  std::vector<int> seen(roles.size(), -1);  // index of the keypoint that last traversed the patch
  int stamp = 0;
  for (const Keypoint& k : kp) {
    ++stamp;
    if (!k.visible && !include_invisible) continue;
    const PatchCoord joint = to_patch_coord(k, grid);
    const auto joint_idx = static_cast<std::size_t>(flatten(joint, grid));
    if (roles[joint_idx] == PatchRole::Unselected) roles[joint_idx] = PatchRole::Joint;
    seen[joint_idx] = stamp;

    queue.clear();
    for (const auto& c : neighbors4(joint, grid)) queue.push_back(c);
    int added = 0;
    while (added < n.value() && !queue.empty()) {
      const PatchCoord c = queue.front();
      queue.pop_front();
      const auto idx = static_cast<std::size_t>(flatten(c, grid));
      if (seen[idx] == stamp) continue;
      seen[idx] = stamp;
      if (roles[idx] == PatchRole::Unselected) {
        roles[idx] = PatchRole::Neighbor;
        ++added;
      }
      for (const auto& next : neighbors4(c, grid)) queue.push_back(next);
    }
  }
}

void rasterize_pairs(const KeypointPrediction& kp, const SkeletonPairs& pairs, const PatchGrid& grid,
                     bool include_invisible, std::vector<PatchRole>& roles) {
  pairs.validate(kp.size());
  for (const auto& [a, b] : pairs) {
    const Keypoint& ka = kp[static_cast<std::size_t>(a)];
    const Keypoint& kb = kp[static_cast<std::size_t>(b)];
    if (!include_invisible && (!ka.visible || !kb.visible)) continue;
    for (const auto& c : bresenham(to_patch_coord(ka, grid), to_patch_coord(kb, grid))) {
      auto& role = roles[static_cast<std::size_t>(flatten(c, grid))];
      if (role == PatchRole::Unselected) role = PatchRole::Skeleton;
    }
  }
}

PatchSet to_patch_set(const std::vector<PatchRole>& roles, const PatchGrid& grid) {
  std::vector<PatchIndex> idx;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] != PatchRole::Unselected) idx.push_back(static_cast<PatchIndex>(i));
  }
  return PatchSet(std::move(idx), grid);
}

std::vector<PatchRole> skeleton_roles(const KeypointPrediction& kp, const SkeletonPairs& pairs,
                                      const PatchGrid& grid, NeighborBudget n, const SelectionConfig& cfg) {
  std::vector<PatchRole> roles(static_cast<std::size_t>(grid.size()), PatchRole::Unselected);
  // Joints and their expansion are computed exactly as in the neighbour
  // method, so the skeleton output is a superset of it.
  const NeighborBudget budget = cfg.include_joint_neighbors_in_skeleton ? n : NeighborBudget(0);
  expand_joints(kp, grid, budget, cfg.include_invisible, roles);
  rasterize_pairs(kp, pairs, grid, cfg.include_invisible, roles);
  return roles;
}

}  // namespace

PatchSet select_joint_patches(const KeypointPrediction& kp, const PatchGrid& grid, NeighborBudget n,
                              bool include_invisible) {
  std::vector<PatchRole> roles(static_cast<std::size_t>(grid.size()), PatchRole::Unselected);
  expand_joints(kp, grid, n, include_invisible, roles);
  return to_patch_set(roles, grid);
}

std::vector<PatchCoord> bresenham(PatchCoord start, PatchCoord end) {
  const int dx = std::abs(end.x - start.x);
  const int dy = std::abs(end.y - start.y);
  const int sx = end.x >= start.x ? 1 : -1;
  const int sy = end.y >= start.y ? 1 : -1;
  const bool steep = dy > dx;

  // Canonical octant: step along `major`, occasionally along `minor`.
  const int major_len = steep ? dy : dx;
  const int minor_len = steep ? dx : dy;

  std::vector<PatchCoord> out;
  out.reserve(static_cast<std::size_t>(major_len) + 1);
  int x = start.x;
  int y = start.y;
  int eps = 2 * minor_len - major_len;
  for (int step = 0; step <= major_len; ++step) {
    out.push_back({x, y});
    if (eps >= 0) {
      if (steep) x += sx; else y += sy;
      eps -= 2 * major_len;
    }
    eps += 2 * minor_len;
    if (steep) y += sy; else x += sx;
  }
  return out;
}

PatchSet select_skeleton_patches(const KeypointPrediction& kp, const SkeletonPairs& pairs,
                                 const PatchGrid& grid, NeighborBudget n, const SelectionConfig& cfg) {
  return to_patch_set(skeleton_roles(kp, pairs, grid, n, cfg), grid);
}

PatchSet select(const KeypointPrediction& kp, const PatchGrid& grid, const SelectionConfig& cfg) {
  switch (cfg.method) {
    case SelectionMethod::None:
      return PatchSet::all(grid);
    case SelectionMethod::Neighbors:
      return select_joint_patches(kp, grid, cfg.budget, cfg.include_invisible);
    case SelectionMethod::Skeleton:
      return select_skeleton_patches(kp, cfg.pairs, grid, cfg.budget, cfg);
  }
  throw std::logic_error("unhandled selection method");
}

std::vector<PatchRole> label_patches(const KeypointPrediction& kp, const PatchGrid& grid,
                                     const SelectionConfig& cfg) {
  std::vector<PatchRole> roles(static_cast<std::size_t>(grid.size()), PatchRole::Unselected);
  switch (cfg.method) {
    case SelectionMethod::None:
      expand_joints(kp, grid, NeighborBudget(0), cfg.include_invisible, roles);
      for (auto& r : roles) {
        if (r == PatchRole::Unselected) r = PatchRole::Dense;
      }
      break;
    case SelectionMethod::Neighbors:
      expand_joints(kp, grid, cfg.budget, cfg.include_invisible, roles);
      break;
    case SelectionMethod::Skeleton:
      roles = skeleton_roles(kp, cfg.pairs, grid, cfg.budget, cfg);
      break;
  }
  // A joint landing in another joint's neighbourhood is still drawn as a joint.
  for (const auto& p : kp) {
    if (p.visible || cfg.include_invisible) roles[static_cast<std::size_t>(flatten(to_patch_coord(p, grid), grid))] = PatchRole::Joint;
  }
  return roles;
}

}  // namespace sparsepose

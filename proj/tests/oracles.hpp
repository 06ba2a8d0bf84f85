#pragma once

// Independent reference computations used only by tests. None of these call
// into the selection or complexity code they check.

#include <algorithm>
#include <cstdint>
#include <vector>

namespace oracle {

struct Cell {
  int x, y;
};

/// Minor-axis coordinate of a first-octant line at step t, rounded half up:
/// floor(y0 + t*dy/dx + 1/2), in exact integer arithmetic.
inline int rounded_minor(int y0, int t, int dx, int dy) {
  if (dx == 0) return y0;
  return y0 + (2 * t * dy + dx) / (2 * dx);
}

/// Every other cell in breadth-first discovery order from `seed`, built one
/// full layer at a time. Neighbour order is (x,y+1), (x,y-1), (x-1,y), (x+1,y).
inline std::vector<Cell> layered_bfs(Cell seed, int cols, int rows) {
  std::vector<bool> listed(static_cast<std::size_t>(cols * rows), false);
  listed[static_cast<std::size_t>(seed.y * cols + seed.x)] = true;
  std::vector<Cell> order;
  std::vector<Cell> layer{seed};
  while (!layer.empty()) {
    std::vector<Cell> next;
    for (const Cell& c : layer) {
      const Cell nbrs[4] = {{c.x, c.y + 1}, {c.x, c.y - 1}, {c.x - 1, c.y}, {c.x + 1, c.y}};
      for (const Cell& n : nbrs) {
        if (n.x < 0 || n.y < 0 || n.x >= cols || n.y >= rows) continue;
        const auto i = static_cast<std::size_t>(n.y * cols + n.x);
        if (listed[i]) continue;
        listed[i] = true;
        next.push_back(n);
      }
    }
    order.insert(order.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return order;
}

/// Neighbour selection rebuilt from layered_bfs: each keypoint cell is
/// added, then the first n cells of its layered order not already taken.
inline std::vector<int> joint_selection(const std::vector<Cell>& joints, int cols, int rows, int n) {
  std::vector<bool> taken(static_cast<std::size_t>(cols * rows), false);
  for (const Cell& j : joints) {
    taken[static_cast<std::size_t>(j.y * cols + j.x)] = true;
    int added = 0;
    for (const Cell& c : layered_bfs(j, cols, rows)) {
      if (added == n) break;
      auto&& t = taken[static_cast<std::size_t>(c.y * cols + c.x)];
      if (t) continue;
      t = true;
      ++added;
    }
  }
  std::vector<int> out;
  for (int i = 0; i < cols * rows; ++i)
    if (taken[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

/// Multiply-accumulates executed by a naive transposed convolution that
/// computes the full (uncropped) output and then trims the padding.
inline std::uint64_t count_deconv_macs(int in_h, int in_w, int cin, int cout, int kernel) {
  std::uint64_t macs = 0;
  for (int ic = 0; ic < cin; ++ic)
    for (int y = 0; y < in_h; ++y)
      for (int x = 0; x < in_w; ++x)
        for (int oc = 0; oc < cout; ++oc)
          for (int ky = 0; ky < kernel; ++ky)
            for (int kx = 0; kx < kernel; ++kx) ++macs;
  return macs;
}

inline std::uint64_t count_conv1x1_macs(int h, int w, int cin, int cout) {
  std::uint64_t macs = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int oc = 0; oc < cout; ++oc)
        for (int ic = 0; ic < cin; ++ic) ++macs;
  return macs;
}

}  // namespace oracle

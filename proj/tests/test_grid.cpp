#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sparsepose/grid.hpp"
#include "sparsepose/io.hpp"

using namespace sparsepose;

namespace {
const PatchGrid kCoco{256, 192, 16};  // 16 rows x 12 cols
}

TEST_CASE("grid dimensions") {
  CHECK(kCoco.rows() == 16);
  CHECK(kCoco.cols() == 12);
  CHECK(kCoco.size() == 192);
  CHECK_THROWS_AS(PatchGrid(250, 192, 16), std::invalid_argument);
  CHECK_THROWS_AS(PatchGrid(8, 16, 16), std::invalid_argument);
  CHECK_THROWS_AS(PatchGrid(16, 16, 0), std::invalid_argument);
}

TEST_CASE("to_patch_coord") {
  CHECK(to_patch_coord(100, 50, kCoco) == PatchCoord{6, 3});
  CHECK(to_patch_coord(0, 0, kCoco) == PatchCoord{0, 0});
  CHECK(to_patch_coord(500, -3, kCoco) == PatchCoord{11, 0});
  CHECK(to_patch_coord(15.999, 16.0, kCoco) == PatchCoord{0, 1});
  CHECK(to_patch_coord(1e300, -1e300, kCoco) == PatchCoord{11, 0});
}

TEST_CASE("to_patch_coord is monotone in each coordinate") {
  PatchCoord prev = to_patch_coord(-40.0, 0.0, kCoco);
  for (double x = -40.0; x < 260.0; x += 0.37) {
    const PatchCoord c = to_patch_coord(x, 0.0, kCoco);
    CHECK(c.x >= prev.x);
    prev = c;
  }
  prev = to_patch_coord(0.0, -40.0, kCoco);
  for (double y = -40.0; y < 300.0; y += 0.37) {
    const PatchCoord c = to_patch_coord(0.0, y, kCoco);
    CHECK(c.y >= prev.y);
    prev = c;
  }
}

TEST_CASE("flatten and unflatten") {
  CHECK(flatten({6, 3}, kCoco) == 42);
  CHECK(flatten({0, 0}, kCoco) == 0);
  CHECK(flatten({11, 15}, kCoco) == 191);
  CHECK(unflatten(42, kCoco) == PatchCoord{6, 3});
  CHECK(unflatten(0, kCoco) == PatchCoord{0, 0});
  CHECK(unflatten(191, kCoco) == PatchCoord{11, 15});
  CHECK_THROWS_AS(flatten({12, 0}, kCoco), std::out_of_range);
  CHECK_THROWS_AS(flatten({0, -1}, kCoco), std::out_of_range);
  CHECK_THROWS_AS(unflatten(192, kCoco), std::out_of_range);
  CHECK_THROWS_AS(unflatten(-1, kCoco), std::out_of_range);
}

TEST_CASE("flatten is a bijection on small grids") {
  for (int rows = 1; rows <= 6; ++rows) {
    for (int cols = 1; cols <= 6; ++cols) {
      const PatchGrid g(rows * 4, cols * 4, 4);
      std::vector<int> hits(static_cast<std::size_t>(g.size()), 0);
      for (int y = 0; y < rows; ++y) {
        for (int x = 0; x < cols; ++x) {
          const PatchIndex p = flatten({x, y}, g);
          REQUIRE(p >= 0);
          REQUIRE(p < g.size());
          ++hits[static_cast<std::size_t>(p)];
          CHECK(unflatten(p, g) == PatchCoord{x, y});
        }
      }
      for (int h : hits) CHECK(h == 1);
    }
  }
}

TEST_CASE("PatchSet sorts, deduplicates and bounds-checks") {
  const PatchSet s({7, 3, 7, 0}, kCoco);
  CHECK(std::vector<PatchIndex>(s.begin(), s.end()) == std::vector<PatchIndex>{0, 3, 7});
  CHECK(s.contains(3));
  CHECK_FALSE(s.contains(4));
  CHECK_THROWS_AS(PatchSet({192}, kCoco), std::out_of_range);
  CHECK(PatchSet::all(kCoco).size() == 192);
}

TEST_CASE("keypoint prediction validation") {
  CHECK_THROWS_AS(KeypointPrediction(std::vector<Keypoint>{}), std::invalid_argument);
  CHECK_THROWS_AS(KeypointPrediction({{std::nan(""), 1.0}}), std::invalid_argument);
  const KeypointPrediction kp({{1, 2, true}, {3, 4, false}});
  CHECK(kp.visible_count() == 1);
}

TEST_CASE("skeleton pairs") {
  CHECK_THROWS_AS(SkeletonPairs({{2, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(SkeletonPairs({{-1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(SkeletonPairs({{0, 5}}).validate(5), std::out_of_range);
  const auto coco = coco17_skeleton();
  CHECK(coco.size() == 16);
  CHECK_NOTHROW(coco.validate(17));
}

TEST_CASE("shipped skeleton config matches the built-in default") {
  const auto pairs = io::pairs_from_json(io::read_json(SPARSEPOSE_CONFIG_DIR "/skeleton_coco17.json"));
  CHECK(pairs == coco17_skeleton());
}

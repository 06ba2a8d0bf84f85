#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <numeric>

#include "sparsepose/complexity.hpp"
#include "sparsepose/encoder.hpp"
#include "sparsepose/kernels.hpp"
#include "sparsepose/reference.hpp"
#include "sparsepose/rng.hpp"

using namespace sparsepose;

namespace {

const PatchGrid kCoco{256, 192, 16};

EncoderConfig toy(std::uint64_t seed = 0) {
  EncoderConfig c;
  c.seed = seed;
  return c;
}

Image random_image(std::uint64_t seed, const PatchGrid& g = kCoco) {
  SplitMix64 rng(seed);
  Image img(static_cast<std::size_t>(g.image_height()), static_cast<std::size_t>(g.image_width()), 3);
  for (double& v : img.data()) v = rng.uniform();
  return img;
}

Matrix random_matrix(SplitMix64& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("config validation") {
  EncoderConfig c;
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = EncoderConfig{};
  c.layers = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = EncoderConfig{};
  c.mlp_ratio = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = EncoderConfig{};
  c.patch_size = 8;
  CHECK_THROWS_AS(init_weights(c, kCoco), std::invalid_argument);
}

TEST_CASE("init_weights is deterministic per seed") {
  const auto a = init_weights(toy(5), kCoco);
  const auto b = init_weights(toy(5), kCoco);
  const auto c = init_weights(toy(6), kCoco);
  CHECK(a.patch_projection == b.patch_projection);
  CHECK(a.layers[3].ffn_out == b.layers[3].ffn_out);
  CHECK_FALSE(a.patch_projection == c.patch_projection);
  CHECK_FALSE(a.layers[0].query == c.layers[0].query);
  CHECK(a.positional == c.positional);  // positional codes do not depend on the seed

  // Truncated normal: nothing beyond two standard deviations.
  for (double v : a.layers[1].key.data()) CHECK(std::abs(v) <= 0.04);
  CHECK(a.layers[0].norm1_scale == std::vector<double>(64, 1.0));
}

TEST_CASE("positional code at patch 0 is the sinusoid basis at the origin") {
  const auto w = init_weights(toy(), kCoco);
  for (std::size_t j = 0; j < 64; ++j) CHECK(w.positional(0, j) == (j % 2 == 0 ? 0.0 : 1.0));
  const auto code = sinusoid_code(3, 7, 64);
  const auto row = w.positional.row(static_cast<std::size_t>(flatten({7, 3}, kCoco)));
  CHECK(std::equal(code.begin(), code.end(), row.begin()));
  CHECK(code[0] == doctest::Approx(std::sin(3.0)));
  CHECK(code[32] == doctest::Approx(std::sin(7.0)));
}

TEST_CASE("patch_embed") {
  const auto w = init_weights(toy(), kCoco);
  SUBCASE("token count") {
    const auto t = patch_embed(random_image(1), w);
    CHECK(t.size() == 192);
    CHECK(t.channels() == 64);
    CHECK(t.positions().front() == 0);
    CHECK(t.positions().back() == 191);
  }
  SUBCASE("zero image gives positional code plus bias") {
    const auto t = patch_embed(Image(256, 192, 3, 0.0), w);
    for (std::size_t i = 0; i < 192; ++i)
      for (std::size_t j = 0; j < 64; ++j) REQUIRE(t.features()(i, j) == w.patch_bias[j] + w.positional(i, j));
  }
  SUBCASE("locality") {
    Image a = random_image(2);
    Image b = a;
    b(3 * 16 + 5, 6 * 16 + 9, 1) += 0.5;  // inside patch (6, 3) = 42
    const auto ta = patch_embed(a, w), tb = patch_embed(b, w);
    for (std::size_t i = 0; i < 192; ++i) {
      const bool same = std::equal(ta.features().row(i).begin(), ta.features().row(i).end(),
                                   tb.features().row(i).begin());
      CHECK(same == (i != 42));
    }
  }
  SUBCASE("dimension mismatch") { CHECK_THROWS_AS(patch_embed(Image(128, 192, 3), w), std::invalid_argument); }
  SUBCASE("matches the serial reference") {
    const Image img = random_image(3);
    CHECK(max_abs_diff(patch_embed(img, w).features().data(), reference::patch_embed(img, w).data()) < 1e-12);
  }
}

TEST_CASE("gather") {
  const auto w = init_weights(toy(), kCoco);
  const auto full = patch_embed(random_image(4), w);
  CHECK(gather(full, PatchSet::all(kCoco)).features() == full.features());
  const auto one = gather(full, PatchSet({0}, kCoco));
  CHECK(one.size() == 1);
  const auto two = gather(full, PatchSet({7, 3}, kCoco));
  CHECK(two.positions() == std::vector<PatchIndex>{3, 7});
  CHECK(std::equal(two.features().row(0).begin(), two.features().row(0).end(), full.features().row(3).begin()));
  CHECK(std::equal(two.features().row(1).begin(), two.features().row(1).end(), full.features().row(7).begin()));
  CHECK_THROWS_AS(gather(two, PatchSet({5}, kCoco)), std::out_of_range);
}

TEST_CASE("TokenSequence invariants") {
  CHECK_THROWS_AS(TokenSequence(Matrix(2, 4), {3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(TokenSequence(Matrix(2, 4), {4, 3}), std::invalid_argument);
  CHECK_THROWS_AS(TokenSequence(Matrix(0, 4), {}), std::invalid_argument);
  CHECK_THROWS_AS(TokenSequence(Matrix(1, 4), {1, 2}), std::invalid_argument);
}

TEST_CASE("single-token attention passes the value through") {
  SplitMix64 rng(8);
  const Matrix q = random_matrix(rng, 1, 64), k = random_matrix(rng, 1, 64), v = random_matrix(rng, 1, 64);
  CHECK(kernels::multi_head_attention(q, k, v, 4) == v);
}

TEST_CASE("attention rows are probability distributions") {
  SplitMix64 rng(12);
  const Matrix q = random_matrix(rng, 50, 64), k = random_matrix(rng, 50, 64);
  for (int h = 0; h < 4; ++h) {
    const Matrix p = kernels::attention_probabilities(q, k, 4, h);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double sum = 0.0;
      for (double v : p.row(i)) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("softmax is stable for large scores") {
  Matrix s(1, 3);
  s(0, 0) = 1000.0;
  s(0, 1) = 1000.0;
  s(0, 2) = -1000.0;
  kernels::softmax_rows(s);
  CHECK(s(0, 0) == doctest::Approx(0.5));
  CHECK(s(0, 2) == 0.0);
}

TEST_CASE("transformer_forward is permutation-equivariant") {
  const auto w = init_weights(toy(), kCoco);
  const auto tokens = gather(patch_embed(random_image(5), w), PatchSet({1, 9, 30, 31, 77, 150, 191}, kCoco));
  const Matrix out = transformer_forward(tokens.features(), w);
  SplitMix64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::size_t> perm(tokens.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.next() % (i + 1)]);
    Matrix shuffled(tokens.size(), 64);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const auto src = tokens.features().row(perm[i]);
      std::copy(src.begin(), src.end(), shuffled.row(i).begin());
    }
    const Matrix out_p = transformer_forward(shuffled, w);
    for (std::size_t i = 0; i < perm.size(); ++i)
      CHECK(max_abs_diff(out_p.row(i), out.row(perm[i])) < 1e-12);
  }
}

TEST_CASE("transformer_forward matches the serial reference") {
  const auto w = init_weights(toy(3), kCoco);
  const auto full = patch_embed(random_image(6), w);
  SUBCASE("all tokens") {
    const auto sparse = transformer_forward(gather(full, PatchSet::all(kCoco)), w);
    const Matrix dense = reference::transformer_forward(full.features(), w);
    CHECK(max_abs_diff(sparse.features().data(), dense.data()) <= 1e-6);
    CHECK(sparse.positions() == full.positions());
  }
  SUBCASE("a subset") {
    const auto sel = gather(full, PatchSet({0, 5, 17, 18, 19, 100, 180}, kCoco));
    CHECK(max_abs_diff(transformer_forward(sel, w).features().data(),
                       reference::transformer_forward(sel.features(), w).data()) <= 1e-6);
  }
}

TEST_CASE("transformer_forward is deterministic and shape-preserving") {
  const auto w = init_weights(toy(), kCoco);
  const auto t = gather(patch_embed(random_image(7), w), PatchSet({2, 4, 8, 16, 32, 64, 128}, kCoco));
  const auto a = transformer_forward(t, w), b = transformer_forward(t, w);
  CHECK(a.features() == b.features());
  CHECK(a.positions() == t.positions());
  CHECK(a.features().rows() == 7);
  CHECK(a.features().cols() == 64);
}

TEST_CASE("non-finite activations raise NumericError") {
  const auto w = init_weights(toy(), kCoco);
  Matrix x(2, 64, 1e308);
  x(1, 3) = -1e308;
  CHECK_THROWS_AS(transformer_forward(x, w), NumericError);
}

TEST_CASE("fewer tokens cost less, in both FLOPs and wall time") {
  const auto w = init_weights(toy(), kCoco);
  const auto full = patch_embed(random_image(8), w);
  std::vector<PatchIndex> few_idx{0, 20, 40, 60, 80, 100, 120, 140};
  const auto few = gather(full, PatchSet(few_idx, kCoco));

  CHECK(encoder_flops(toy(), 8).total_flops < encoder_flops(toy(), 192).total_flops);
  auto time = [&](const TokenSequence& t) {
    double best = 1e30;
    for (int r = 0; r < 3; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)transformer_forward(t, w);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };
  CHECK(time(few) < time(full));
}

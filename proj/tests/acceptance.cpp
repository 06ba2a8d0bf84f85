// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sparsepose/complexity.hpp"
#include "sparsepose/decoder.hpp"
#include "sparsepose/harness.hpp"
#include "sparsepose/metrics.hpp"
#include "sparsepose/reference.hpp"
#include "sparsepose/rng.hpp"
#include "sparsepose/selection.hpp"

using namespace sparsepose;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

Outcome flop_reproduction() {
  const auto l = model_preset("vitl");
  const auto b = model_preset("vitb");
  const double enc_l = encoder_flops(l.encoder, 192).encoder_flops;
  const double tot_b = pipeline_flops(b.encoder, b.decoder, b.grid, 192).total_flops;
  const double err_l = std::abs(enc_l - 59.8e9) / 59.8e9;
  const double err_b = std::abs(tot_b - 17.9e9) / 17.9e9;
  return {err_l <= 0.02 && err_b <= 0.10,
          fmt("ViT-L encoder %.3f G (%.2f%% off 59.8 G, tol 2%%); ViT-B total %.3f G (%.2f%% off 17.9 G, tol 10%%)",
              enc_l / 1e9, 100 * err_l, tot_b / 1e9, 100 * err_b)};
}

Outcome flop_inversion() {
  const double n = tokens_for_encoder_flops(model_preset("vitl").encoder, 35.6e9);
  return {n >= 110.0 && n <= 125.0 && n <= 136.0, fmt("N = %.2f at 35.6 G (want [110, 125], max 136)", n)};
}

Outcome bresenham_oracle() {
  constexpr int side = 32;
  long long pairs = 0, first_octant = 0, failures = 0;
  for (int x0 = 0; x0 < side; ++x0)
    for (int y0 = 0; y0 < side; ++y0)
      for (int x1 = 0; x1 < side; ++x1)
        for (int y1 = 0; y1 < side; ++y1) {
          ++pairs;
          const auto line = bresenham({x0, y0}, {x1, y1});
          const int dx = x1 - x0, dy = y1 - y0;
          bool ok = line.size() == static_cast<std::size_t>(std::max(std::abs(dx), std::abs(dy)) + 1) &&
                    line.front() == PatchCoord{x0, y0} && line.back() == PatchCoord{x1, y1};
          for (std::size_t i = 1; ok && i < line.size(); ++i) {
            const int sx = line[i].x - line[i - 1].x, sy = line[i].y - line[i - 1].y;
            ok = std::abs(sx) <= 1 && std::abs(sy) <= 1 && (sx != 0 || sy != 0) && sx * dx >= 0 && sy * dy >= 0;
          }
          if (ok && dx >= 0 && dy >= 0 && dy <= dx) {
            ++first_octant;
            for (int t = 0; ok && t <= dx; ++t)
              ok = line[static_cast<std::size_t>(t)].x == x0 + t &&
                   line[static_cast<std::size_t>(t)].y == oracle::rounded_minor(y0, t, dx, dy);
          }
          if (!ok) ++failures;
        }
  return {failures == 0, fmt("%lld endpoint pairs (%lld first-octant), %lld mismatches", pairs, first_octant, failures)};
}

Outcome bfs_oracle() {
  constexpr int cols = 12, rows = 16;
  const PatchGrid grid(rows * 16, cols * 16, 16);
  long long single = 0, failures = 0;
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x)
      for (int n = 0; n <= 12; ++n) {
        ++single;
        const KeypointPrediction kp({{x * 16 + 8.0, y * 16 + 8.0, true}});
        const auto got = select_joint_patches(kp, grid, NeighborBudget(n));
        if (std::vector<int>(got.begin(), got.end()) != oracle::joint_selection({{x, y}}, cols, rows, n)) ++failures;
      }
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(rng.next() % 16);
    const int n = static_cast<int>(rng.next() % 13);
    std::vector<Keypoint> pts;
    std::vector<oracle::Cell> cells;
    for (int i = 0; i < k; ++i) {
      const int x = static_cast<int>(rng.next() % cols), y = static_cast<int>(rng.next() % rows);
      pts.push_back({x * 16 + rng.uniform(0, 16), y * 16 + rng.uniform(0, 16), true});
      cells.push_back({x, y});
    }
    const auto got = select_joint_patches(KeypointPrediction(pts), grid, NeighborBudget(n));
    if (std::vector<int>(got.begin(), got.end()) != oracle::joint_selection(cells, cols, rows, n)) ++failures;
  }
  return {failures == 0, fmt("%lld single-keypoint cases + 1000 multi-keypoint cases, %lld mismatches", single, failures)};
}

Outcome sparse_dense() {
  PipelineConfig cfg;
  cfg.selection.method = SelectionMethod::None;
  const Pipeline pipe(cfg);
  const auto sample = synth_pose(11, cfg.grid);
  const auto r = pipe.run(sample.image, sample.keypoints);
  const auto dense = reference::dense_pipeline(sample.image, pipe.encoder_weights(), pipe.decoder_weights());
  const double diff = max_abs_diff(r.heatmap.data(), dense.data());
  return {r.selection.size() == 192 && diff <= 1e-6,
          fmt("%zu tokens, max |sparse - dense| = %.3e (tol 1e-6)", r.selection.size(), diff)};
}

Outcome zero_fill() {
  const PatchGrid grid(256, 192, 16);
  const auto weights = init_weights(EncoderConfig{}, grid);
  const auto full = patch_embed(synth_pose(5, grid).image, weights);
  SplitMix64 rng(77);
  long long cells = 0, nonzero = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double keep = rng.uniform(0.02, 0.9);
    std::vector<PatchIndex> idx;
    for (int i = 0; i < grid.size(); ++i)
      if (rng.uniform() < keep) idx.push_back(i);
    if (idx.empty()) idx.push_back(static_cast<PatchIndex>(rng.next() % 192));
    const PatchSet sel(idx, grid);
    const auto f = scatter_zero_fill(transformer_forward(gather(full, sel), weights), grid);
    for (int i = 0; i < grid.size(); ++i) {
      if (sel.contains(i)) continue;
      const auto c = unflatten(i, grid);
      for (std::size_t ch = 0; ch < f.dim2(); ++ch) {
        ++cells;
        const double v = f(static_cast<std::size_t>(c.y), static_cast<std::size_t>(c.x), ch);
        if (std::signbit(v) || v != 0.0) ++nonzero;
      }
    }
  }
  return {nonzero == 0, fmt("100 selections, %lld unselected entries, %lld not bitwise +0", cells, nonzero)};
}

Outcome heatmap_round_trip() {
  SplitMix64 rng(31);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const KeypointPrediction kp({{rng.uniform(0, 192), rng.uniform(0, 256), true}});
    const auto back = decode_heatmap(gaussian_target(kp, 64, 48));
    worst = std::max({worst, std::abs(back[0].x - kp[0].x), std::abs(back[0].y - kp[0].y)});
  }
  return {worst <= 4.0, fmt("1000 keypoints, worst max-norm error %.3f px (tol 4)", worst)};
}

Outcome tradeoff_monotonicity() {
  BenchConfig cfg;
  cfg.samples = 100;
  for (int n = 0; n <= 16; ++n) cfg.n_values.push_back(n);
  cfg.sigma_noise = 6.0;
  const auto noisy = bench_sweep(cfg);
  cfg.sigma_noise = 0.0;
  const auto exact = bench_sweep(cfg);

  bool flops_ok = true, exact_ok = true, noisy_ok = true;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    for (const auto* rows : {&noisy, &exact}) {
      const auto& r = *rows;
      if (i > 0 && !(r[i].gflops > r[i - 1].gflops) && r[i - 1].avg_tokens < 192.0) flops_ok = false;
    }
    if (exact[i].coverage != 1.0) exact_ok = false;
    if (i > 0 && noisy[i].coverage < noisy[i - 1].coverage) noisy_ok = false;
  }
  std::string cov;
  for (const auto& r : noisy) cov += fmt("%.3f ", r.coverage);
  return {flops_ok && exact_ok && noisy_ok,
          fmt("gflops %.4f..%.4f %s; coverage@0 all 1.0: %s; coverage@6 non-decreasing: %s [%s]", noisy.front().gflops,
              noisy.back().gflops, flops_ok ? "strictly increasing" : "NOT increasing", exact_ok ? "yes" : "no",
              noisy_ok ? "yes" : "no", cov.c_str())};
}

Outcome metric_sanity() {
  SplitMix64 rng(3);
  std::vector<Keypoint> pts;
  for (int i = 0; i < 17; ++i) pts.push_back({rng.uniform(0, 192), rng.uniform(0, 256), true});
  const KeypointPrediction gt(pts);
  const double o = oks(gt, gt, {falloff_from_sigmas(coco17_sigmas()), 80.0});
  const double p = pckh(gt, gt, 30.0);
  const double s = 50.0, k = 0.25;
  const double single = oks(KeypointPrediction({{100 + s * k, 40, true}}), KeypointPrediction({{100, 40, true}}),
                            OksParams{{k}, s});
  const double ap = average_precision(std::vector<double>(25, 0.7));
  const bool ok = o == 1.0 && p == 100.0 && std::abs(single - std::exp(-0.5)) <= 1e-9 && ap == 0.5;
  return {ok, fmt("oks(gt,gt)=%.12g pckh(gt,gt)=%.12g oks(d=s*k)=%.12f (exp(-1/2)=%.12f) AP(0.7)=%.12g", o, p,
                  single, std::exp(-0.5), ap)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "sparsepose_acceptance";
  fs::remove_all(root);
  const std::string cli = SPARSEPOSE_CLI;
  const std::string cfg = SPARSEPOSE_CONFIG_DIR;
  // Each command writes its outputs into the run directory it is given.
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"synth --seed 9 --image {d}/img.ppm --keypoints {d}/gt.json --guide {d}/guide.json --noise 6",
       {"img.ppm", "gt.json", "guide.json"}},
      {"select --keypoints {d}/guide.json --method neighbors --n 7 --out {d}/sel.json", {"sel.json"}},
      {"select --keypoints {d}/guide.json --method skeleton --n 2 --out {d}/skel.json", {"skel.json"}},
      {"encode --config " + cfg + "/toy.json --select {d}/sel.json --image {d}/img.ppm --out {d}/feat.bin",
       {"feat.bin"}},
      {"decode --featuremap {d}/feat.bin --config " + cfg + "/toy.json --heatmap-out {d}/heat.bin --out {d}/dec.json",
       {"heat.bin", "dec.json"}},
      {"decode --heatmap {d}/heat.bin --out {d}/dec2.json", {"dec2.json"}},
      {"flops --model vitl --tokens 116 > {d}/flops.json 2> {d}/flops.txt", {"flops.json", "flops.txt"}},
      {"flops --select-config " + cfg + "/neighbors_n7.json --keypoints {d}/guide.json > {d}/flops2.json 2>/dev/null",
       {"flops2.json"}},
      {"metrics --pred {d}/guide.json --gt {d}/gt.json --head-size 30 --out {d}/metrics.json", {"metrics.json"}},
      {"bench --n 0:6 --samples 20 --noise 6 --model toy --method neighbors --seed 4 --out {d}/bench.csv",
       {"bench.csv"}},
      {"viz --keypoints {d}/guide.json --image {d}/img.ppm --method skeleton --out {d}/viz.ppm", {"viz.ppm"}},
      {"run --image {d}/img.ppm --keypoints {d}/guide.json --config " + cfg +
           "/toy.json --heatmap {d}/run_heat.bin --out {d}/run.json",
       {"run_heat.bin", "run.json"}},
  };

  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    for (const auto& [cmd, _] : commands) {
      std::string line = cmd;
      for (std::size_t pos; (pos = line.find("{d}")) != std::string::npos;) line.replace(pos, 3, dir.string());
      if (std::system(("\"" + cli + "\" " + line).c_str()) != 0)
        return {false, "command failed: sparsepose " + line};
    }
  }
  int files = 0;
  std::string diffs;
  for (const auto& [_, outputs] : commands)
    for (const auto& f : outputs) {
      ++files;
      const auto a = slurp(root / "a" / f), b = slurp(root / "b" / f);
      if (a.empty() || a != b) diffs += " " + f;
    }
  fs::remove_all(root);
  return {diffs.empty(), fmt("%zu commands, %d output files compared%s%s", commands.size(), files,
                             diffs.empty() ? ", all byte-identical" : "; differing or empty:", diffs.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"FLOP reproduction", flop_reproduction},
      {"FLOP inversion consistency", flop_inversion},
      {"Bresenham oracle equivalence", bresenham_oracle},
      {"BFS oracle equivalence", bfs_oracle},
      {"Sparse/dense equivalence", sparse_dense},
      {"Zero-fill contract", zero_fill},
      {"Heatmap round-trip", heatmap_round_trip},
      {"Trade-off monotonicity", tradeoff_monotonicity},
      {"Metric sanity", metric_sanity},
      {"Determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s  %2zu. %-29s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}

#include "sparsepose/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "sparsepose/rng.hpp"

namespace sparsepose {

// ---------------------------------------------------------------------------
// Configuration

void PipelineConfig::validate() const {
  encoder.validate();
  decoder.validate();
  if (encoder.patch_size != grid.patch_size()) throw std::invalid_argument("encoder patch size differs from grid");
  if (decoder.in_channels != encoder.channels) throw std::invalid_argument("decoder input channels differ from encoder");
  if (grid.patch_size() % 4 != 0) throw std::invalid_argument("patch size must be a multiple of 4 for the heatmap head");
  if (!(sigma > 0.0)) throw std::invalid_argument("heatmap sigma must be positive");
}

SelectionConfig selection_config_from_json(const nlohmann::json& s) {
  SelectionConfig cfg;
  cfg.method = parse_selection_method(s.value("method", std::string(to_string(cfg.method))));
  cfg.budget = NeighborBudget(s.value("n", cfg.budget.value()));
  cfg.include_joint_neighbors_in_skeleton = s.value("skeleton_neighbors", cfg.include_joint_neighbors_in_skeleton);
  cfg.include_invisible = s.value("include_invisible", cfg.include_invisible);
  if (s.contains("pairs")) {
    std::vector<SkeletonPairs::Pair> pairs;
    for (const auto& p : s["pairs"]) pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    cfg.pairs = SkeletonPairs(std::move(pairs));
  }
  return cfg;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  const int height = j.value("height", cfg.grid.image_height());
  const int width = j.value("width", cfg.grid.image_width());
  const int patch = j.value("patch_size", cfg.grid.patch_size());
  cfg.grid = PatchGrid(height, width, patch);

  if (j.contains("encoder")) {
    const auto& e = j["encoder"];
    cfg.encoder.channels = e.value("channels", cfg.encoder.channels);
    cfg.encoder.layers = e.value("layers", cfg.encoder.layers);
    cfg.encoder.heads = e.value("heads", cfg.encoder.heads);
    cfg.encoder.mlp_ratio = e.value("mlp_ratio", cfg.encoder.mlp_ratio);
    cfg.encoder.seed = e.value("seed", cfg.encoder.seed);
  }
  cfg.encoder.patch_size = patch;

  if (j.contains("decoder")) {
    const auto& d = j["decoder"];
    cfg.decoder.hidden = d.value("hidden", cfg.decoder.hidden);
    cfg.decoder.keypoints = d.value("keypoints", cfg.decoder.keypoints);
    cfg.decoder.seed = d.value("seed", cfg.decoder.seed);
  }
  cfg.decoder.in_channels = cfg.encoder.channels;

  if (j.contains("selection")) cfg.selection = selection_config_from_json(j["selection"]);
  cfg.sigma = j.value("sigma", cfg.sigma);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : cfg.selection.pairs) pairs.push_back({a, b});
  return {
      {"height", cfg.grid.image_height()},
      {"width", cfg.grid.image_width()},
      {"patch_size", cfg.grid.patch_size()},
      {"encoder",
       {{"channels", cfg.encoder.channels},
        {"layers", cfg.encoder.layers},
        {"heads", cfg.encoder.heads},
        {"mlp_ratio", cfg.encoder.mlp_ratio},
        {"seed", cfg.encoder.seed}}},
      {"decoder", {{"hidden", cfg.decoder.hidden}, {"keypoints", cfg.decoder.keypoints}, {"seed", cfg.decoder.seed}}},
      {"selection",
       {{"method", std::string(to_string(cfg.selection.method))},
        {"n", cfg.selection.budget.value()},
        {"skeleton_neighbors", cfg.selection.include_joint_neighbors_in_skeleton},
        {"include_invisible", cfg.selection.include_invisible},
        {"pairs", pairs}}},
      {"sigma", cfg.sigma},
      {"seed", cfg.seed},
  };
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(PipelineConfig cfg)
    : cfg_(std::move(cfg)),
      encoder_((cfg_.validate(), init_weights(cfg_.encoder, cfg_.grid))),
      decoder_(init_decoder_weights(cfg_.decoder)) {}

PipelineResult Pipeline::run(const Image& image, const KeypointPrediction& guide) const {
  return run_with_selection(image, select(guide, cfg_.grid, cfg_.selection));
}

PipelineResult Pipeline::run_with_selection(const Image& image, const PatchSet& selection) const {
  PipelineResult r;
  r.selection = selection;
  const TokenSequence sparse = gather(patch_embed(image, encoder_), selection);
  r.featuremap = scatter_zero_fill(transformer_forward(sparse, encoder_), cfg_.grid);
  r.heatmap = decode_head(r.featuremap, decoder_);
  r.keypoints = decode_heatmap(r.heatmap, cfg_.grid.patch_size() / 4.0);
  r.flops = pipeline_flops(cfg_.encoder, cfg_.decoder, cfg_.grid, static_cast<double>(selection.size()));
  return r;
}

PipelineResult run_pipeline(const Image& image, const KeypointPrediction& guide, const PipelineConfig& cfg) {
  return Pipeline(cfg).run(image, guide);
}

// ---------------------------------------------------------------------------
// Synthetic data

namespace {

struct Vec2 {
  double x, y;
};

// Frontal standing pose in body units (y down, hips at the origin).
constexpr std::array<Vec2, 17> kTemplate = {{
    {0.00, -0.62},  {0.03, -0.65},  {-0.03, -0.65}, {0.07, -0.63},  {-0.07, -0.63}, {0.16, -0.45},
    {-0.16, -0.45}, {0.20, -0.22},  {-0.20, -0.22}, {0.22, 0.00},   {-0.22, 0.00},  {0.10, 0.00},
    {-0.10, 0.00},  {0.11, 0.25},   {-0.11, 0.25},  {0.12, 0.50},   {-0.12, 0.50},
}};
// Kinematic tree, listed parent-first; -1 marks the root.
constexpr std::array<std::pair<int, int>, 17> kTree = {{
    {11, -1}, {12, 11}, {5, 11}, {6, 12}, {7, 5}, {9, 7}, {8, 6}, {10, 8}, {13, 11},
    {15, 13}, {14, 12}, {16, 14}, {0, 5}, {1, 0}, {2, 0}, {3, 1}, {4, 2},
}};

double joint_swing(int joint) {
  switch (joint) {
    case 7: case 8: case 9: case 10: case 13: case 14: case 15: case 16: return 0.6;
    case 0: case 1: case 2: case 3: case 4: return 0.2;
    default: return 0.1;
  }
}

std::vector<Vec2> coco_figure(SplitMix64& rng) {
  std::vector<Vec2> pos(17);
  std::vector<double> angle(17, 0.0);
  for (const auto& [joint, parent] : kTree) {
    const auto j = static_cast<std::size_t>(joint);
    if (parent < 0) {
      pos[j] = kTemplate[j];
      angle[j] = rng.uniform(-0.3, 0.3);
      continue;
    }
    const auto p = static_cast<std::size_t>(parent);
    angle[j] = angle[p] + rng.uniform(-joint_swing(joint), joint_swing(joint));
    const double len = rng.uniform(0.85, 1.15);
    const double bx = (kTemplate[j].x - kTemplate[p].x) * len;
    const double by = (kTemplate[j].y - kTemplate[p].y) * len;
    const double c = std::cos(angle[j]), s = std::sin(angle[j]);
    pos[j] = {pos[p].x + c * bx - s * by, pos[p].y + s * bx + c * by};
  }
  return pos;
}

std::vector<Vec2> chain_figure(SplitMix64& rng, int k) {
  std::vector<Vec2> pos(static_cast<std::size_t>(k));
  double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 1; i < pos.size(); ++i) {
    heading += rng.uniform(-0.8, 0.8);
    const double len = rng.uniform(0.08, 0.15);
    pos[i] = {pos[i - 1].x + len * std::cos(heading), pos[i - 1].y + len * std::sin(heading)};
  }
  return pos;
}

// Scales and translates body-unit positions into the frame with a margin.
void fit_to_frame(std::vector<Vec2>& pos, const PatchGrid& grid, SplitMix64& rng) {
  constexpr double margin = 4.0;
  double minx = pos[0].x, maxx = pos[0].x, miny = pos[0].y, maxy = pos[0].y;
  for (const auto& p : pos) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const double w = grid.image_width(), h = grid.image_height();
  const double bw = std::max(maxx - minx, 1e-6), bh = std::max(maxy - miny, 1e-6);
  double scale = rng.uniform(0.55, 0.9) * h / bh;
  scale = std::min({scale, (w - 2 * margin) / bw, (h - 2 * margin) / bh});
  const double tx = rng.uniform(margin - minx * scale, w - margin - maxx * scale);
  const double ty = rng.uniform(margin - miny * scale, h - margin - maxy * scale);
  for (auto& p : pos) p = {p.x * scale + tx, p.y * scale + ty};
}

void stamp(Image& img, int x, int y, double value) {
  if (x < 0 || y < 0 || static_cast<std::size_t>(y) >= img.dim0() || static_cast<std::size_t>(x) >= img.dim1()) return;
  for (std::size_t c = 0; c < 3; ++c) {
    double& px = img(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c);
    px = std::max(px, value);
  }
}

}  // namespace

SyntheticSample synth_pose(std::uint64_t seed, const PatchGrid& grid, int num_keypoints) {
  if (num_keypoints < 2) throw std::invalid_argument("synthetic figures need at least two keypoints");
  SplitMix64 rng(seed);
  SplitMix64 shape = rng.split(0);
  SplitMix64 texture = rng.split(1);

  SyntheticSample s;
  std::vector<Vec2> pos;
  if (num_keypoints == 17) {
    pos = coco_figure(shape);
    s.pairs = coco17_skeleton();
  } else {
    pos = chain_figure(shape, num_keypoints);
    std::vector<SkeletonPairs::Pair> chain;
    for (int i = 0; i + 1 < num_keypoints; ++i) chain.emplace_back(i, i + 1);
    s.pairs = SkeletonPairs(std::move(chain));
  }
  fit_to_frame(pos, grid, shape);

  std::vector<Keypoint> kps;
  for (const auto& p : pos) kps.push_back({p.x, p.y, true, 1.0});
  s.keypoints = KeypointPrediction(std::move(kps));

  const auto h = static_cast<std::size_t>(grid.image_height());
  const auto w = static_cast<std::size_t>(grid.image_width());
  s.image = Image(h, w, 3);
  for (double& v : s.image.data()) v = texture.uniform(0.0, 0.15);

  for (const auto& [a, b] : s.pairs) {
    const auto& pa = s.keypoints[static_cast<std::size_t>(a)];
    const auto& pb = s.keypoints[static_cast<std::size_t>(b)];
    const PatchCoord from{static_cast<int>(pa.x), static_cast<int>(pa.y)};
    const PatchCoord to{static_cast<int>(pb.x), static_cast<int>(pb.y)};
    for (const auto& c : bresenham(from, to))
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) stamp(s.image, c.x + dx, c.y + dy, 0.8);
  }
  constexpr double blob_sigma = 2.5;
  for (const auto& k : s.keypoints) {
    const int cx = static_cast<int>(k.x), cy = static_cast<int>(k.y);
    for (int dy = -6; dy <= 6; ++dy)
      for (int dx = -6; dx <= 6; ++dx) {
        const double ex = cx + dx + 0.5 - k.x, ey = cy + dy + 0.5 - k.y;
        stamp(s.image, cx + dx, cy + dy, std::exp(-(ex * ex + ey * ey) / (2 * blob_sigma * blob_sigma)));
      }
  }
  return s;
}

KeypointPrediction noisy_oracle(const KeypointPrediction& gt, double sigma_noise, std::uint64_t seed,
                                const PatchGrid& grid) {
  if (!(sigma_noise >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
  SplitMix64 rng(seed);
  KeypointPrediction out = gt;
  const double max_x = grid.image_width() - 1.0;
  const double max_y = grid.image_height() - 1.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!out[k].visible) continue;
    // Draw both offsets even at sigma 0 so streams line up across noise levels.
    const double nx = rng.normal(), ny = rng.normal();
    if (sigma_noise == 0.0) continue;
    out[k].x = std::clamp(out[k].x + sigma_noise * nx, 0.0, max_x);
    out[k].y = std::clamp(out[k].y + sigma_noise * ny, 0.0, max_y);
  }
  return out;
}

double joint_coverage(const KeypointPrediction& gt, const PatchSet& selection, const PatchGrid& grid) {
  std::size_t visible = 0, hit = 0;
  for (const auto& k : gt) {
    if (!k.visible) continue;
    ++visible;
    if (selection.contains(flatten(to_patch_coord(k, grid), grid))) ++hit;
  }
  if (visible == 0) throw std::invalid_argument("coverage needs at least one visible keypoint");
  return static_cast<double>(hit) / static_cast<double>(visible);
}

// ---------------------------------------------------------------------------
// Benchmark sweep

std::vector<BenchRow> bench_sweep(const BenchConfig& cfg) {
  if (cfg.n_values.empty()) throw std::invalid_argument("bench sweep needs at least one n value");
  if (cfg.samples < 1) throw std::invalid_argument("bench sweep needs at least one sample");
  const ModelSpec model = model_preset(cfg.model);
  const PatchGrid& grid = model.grid;
  const auto samples = static_cast<std::size_t>(cfg.samples);

  std::vector<KeypointPrediction> truth(samples), guides(samples);
  std::vector<Image> images(cfg.timing ? samples : 0);
  const SplitMix64 root(cfg.seed);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(samples); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const SplitMix64 item = root.split(u);
    SyntheticSample s = synth_pose(item.split(0).next(), grid, model.decoder.keypoints);
    guides[u] = noisy_oracle(s.keypoints, cfg.sigma_noise, item.split(1).next(), grid);
    truth[u] = std::move(s.keypoints);
    if (cfg.timing) images[u] = std::move(s.image);
  }

  std::vector<BenchRow> rows;
  for (int n : cfg.n_values) {
    PipelineConfig pc;
    pc.grid = grid;
    pc.encoder = model.encoder;
    pc.decoder = model.decoder;
    pc.selection.method = cfg.method;
    pc.selection.budget = NeighborBudget(n);
    pc.selection.include_joint_neighbors_in_skeleton = cfg.skeleton_neighbors;

    std::vector<PatchSet> selections(samples);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(samples); ++i) {
      const auto u = static_cast<std::size_t>(i);
      selections[u] = select(guides[u], grid, pc.selection);
    }

    BenchRow row;
    row.n = n;
    for (std::size_t i = 0; i < samples; ++i) {
      const auto tokens = static_cast<double>(selections[i].size());
      row.avg_tokens += tokens;
      row.gflops += pipeline_flops(model.encoder, model.decoder, grid, tokens).total_flops / 1e9;
      row.coverage += joint_coverage(truth[i], selections[i], grid);
    }
    if (cfg.timing) {
      const Pipeline pipeline(pc);
      for (std::size_t i = 0; i < samples; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        (void)pipeline.run_with_selection(images[i], selections[i]);
        row.wall_time_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      }
    }
    const double inv = 1.0 / static_cast<double>(samples);
    row.avg_tokens *= inv;
    row.gflops *= inv;
    row.coverage *= inv;
    row.wall_time_ms *= inv;
    rows.push_back(row);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "n,avg_tokens,gflops,coverage,wall_time_ms\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%.4f,%.6f,%.6f,%.3f\n", r.n, r.avg_tokens, r.gflops, r.coverage,
                  r.wall_time_ms);
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Overlay

Image render_overlay(const Image& image, const KeypointPrediction& kp, const PatchGrid& grid,
                     const SelectionConfig& cfg) {
  if (image.dim0() != static_cast<std::size_t>(grid.image_height()) ||
      image.dim1() != static_cast<std::size_t>(grid.image_width()) || image.dim2() != 3)
    throw std::invalid_argument("overlay image does not match the grid");
  const auto roles = label_patches(kp, grid, cfg);
  Image out = image;
  const int p = grid.patch_size();
  constexpr double alpha = 0.45;
  for (int idx = 0; idx < grid.size(); ++idx) {
    std::array<double, 3> color{};
    switch (roles[static_cast<std::size_t>(idx)]) {
      case PatchRole::Unselected: continue;
      case PatchRole::Joint: color = {1.0, 0.0, 0.0}; break;
      case PatchRole::Neighbor: color = {1.0, 0.55, 0.0}; break;
      case PatchRole::Skeleton: color = {0.1, 0.3, 1.0}; break;
      case PatchRole::Dense: color = {0.2, 0.8, 0.2}; break;
    }
    const PatchCoord c = unflatten(idx, grid);
    for (int y = c.y * p; y < (c.y + 1) * p; ++y)
      for (int x = c.x * p; x < (c.x + 1) * p; ++x)
        for (std::size_t ch = 0; ch < 3; ++ch) {
          double& v = out(static_cast<std::size_t>(y), static_cast<std::size_t>(x), ch);
          v = (1 - alpha) * v + alpha * color[ch];
        }
  }
  for (std::size_t y = 0; y < out.dim0(); ++y)
    for (std::size_t x = 0; x < out.dim1(); ++x)
      if (y % static_cast<std::size_t>(p) == 0 || x % static_cast<std::size_t>(p) == 0)
        for (std::size_t ch = 0; ch < 3; ++ch) out(y, x, ch) = 0.35;
  return out;
}

}  // namespace sparsepose

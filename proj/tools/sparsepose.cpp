// Command-line front end: selection, encoding, decoding, FLOP accounting,
// metrics, the n-sweep benchmark, overlays and end-to-end runs.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "sparsepose/complexity.hpp"
#include "sparsepose/decoder.hpp"
#include "sparsepose/harness.hpp"
#include "sparsepose/io.hpp"
#include "sparsepose/metrics.hpp"
#include "sparsepose/rng.hpp"
#include "sparsepose/selection.hpp"

using namespace sparsepose;
using nlohmann::json;

namespace {

struct GridFlags {
  int height = 256;
  int width = 192;
  int patch = 16;

  void attach(CLI::App* cmd) {
    cmd->add_option("--height", height, "Image height in pixels")->capture_default_str();
    cmd->add_option("--width", width, "Image width in pixels")->capture_default_str();
    cmd->add_option("--patch-size", patch, "Patch side in pixels")->capture_default_str();
  }
  PatchGrid grid() const { return {height, width, patch}; }
};

struct SelectionFlags {
  std::string method = "neighbors";
  int n = 7;
  bool no_skeleton_neighbors = false;
  bool include_invisible = false;
  std::string pairs;

  void attach(CLI::App* cmd) {
    cmd->add_option("--method", method, "none, neighbors or skeleton")
        ->check(CLI::IsMember({"none", "neighbors", "skeleton"}))
        ->capture_default_str();
    cmd->add_option("--n", n, "Neighbour budget per keypoint")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_flag("--no-skeleton-neighbors", no_skeleton_neighbors, "Skeleton method: skip the neighbour expansion");
    cmd->add_flag("--include-invisible", include_invisible, "Select around keypoints marked v=0 too");
    cmd->add_option("--pairs", pairs, "Skeleton pair list (JSON); default is the 16-edge COCO skeleton")
        ->check(CLI::ExistingFile);
  }
  SelectionConfig config() const {
    SelectionConfig cfg;
    cfg.method = parse_selection_method(method);
    cfg.budget = NeighborBudget(n);
    cfg.include_joint_neighbors_in_skeleton = !no_skeleton_neighbors;
    cfg.include_invisible = include_invisible;
    if (!pairs.empty()) cfg.pairs = io::pairs_from_json(io::read_json(pairs));
    return cfg;
  }
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    io::write_text(out, text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

KeypointPrediction read_single(const std::string& path) {
  const auto objects = io::read_keypoint_objects(path);
  if (objects.size() != 1) throw io::FormatError(path + ": expected a single keypoint object");
  return io::keypoints_from_json(objects.front());
}

std::vector<int> parse_n_values(const std::string& text) {
  std::vector<int> out;
  const auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      const int lo = std::stoi(text.substr(0, colon));
      const int hi = std::stoi(text.substr(colon + 1));
      if (lo < 0 || hi < lo) throw CLI::ValidationError("--n", "range must satisfy 0 <= lo <= hi");
      for (int n = lo; n <= hi; ++n) out.push_back(n);
    } else {
      std::size_t pos = 0;
      while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const int n = std::stoi(text.substr(pos, comma - pos));
        if (n < 0) throw CLI::ValidationError("--n", "values must be non-negative");
        out.push_back(n);
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--n", "expected lo:hi or a comma-separated list, got '" + text + "'");
  }
  return out;
}

json flops_json(const FlopReport& r) {
  return {{"token_count", r.token_count},         {"embed_flops", r.embed_flops},
          {"per_layer_attention_flops", r.per_layer_attention_flops},
          {"per_layer_ffn_flops", r.per_layer_ffn_flops},
          {"encoder_flops", r.encoder_flops},     {"decoder_flops", r.decoder_flops},
          {"total_flops", r.total_flops}};
}

void print_flop_table(const std::string& model, const FlopReport& r) {
  std::fprintf(stderr, "model %s, N = %.3f tokens\n", model.c_str(), r.token_count);
  const std::pair<const char*, double> lines[] = {
      {"embed", r.embed_flops},
      {"attention / layer", r.per_layer_attention_flops},
      {"ffn / layer", r.per_layer_ffn_flops},
      {"encoder", r.encoder_flops},
      {"decoder", r.decoder_flops},
      {"total", r.total_flops},
  };
  for (const auto& [name, v] : lines) std::fprintf(stderr, "  %-18s %12.4f GFLOPs\n", name, v / 1e9);
}

// Object scale from the ground truth: the "scale" field, else the square
// root of the visible keypoints' bounding-box area.
double object_scale(const json& obj, const KeypointPrediction& gt, std::optional<double> fixed) {
  if (fixed) return *fixed;
  if (obj.contains("scale")) return obj["scale"].get<double>();
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& p : gt) {
    if (!p.visible) continue;
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  const double area = (x1 - x0) * (y1 - y0);
  if (!(area > 0.0)) throw io::FormatError("ground truth needs a \"scale\" field or a non-degenerate keypoint box");
  return std::sqrt(area);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-selected sparse-token ViT pose estimation toolkit"};
  app.require_subcommand(1);

  // select
  auto* select_cmd = app.add_subcommand("select", "Select patches around guide keypoints");
  GridFlags select_grid;
  SelectionFlags select_flags;
  std::string select_kp, select_out;
  select_grid.attach(select_cmd);
  select_flags.attach(select_cmd);
  select_cmd->add_option("--keypoints", select_kp, "Guide keypoint JSON")->required()->check(CLI::ExistingFile);
  select_cmd->add_option("--out", select_out, "Output path (default stdout)");
  select_cmd->callback([&] {
    const auto grid = select_grid.grid();
    const auto set = select(read_single(select_kp), grid, select_flags.config());
    emit(select_out, io::patch_set_to_json(set).dump() + "\n");
  });

  // encode
  auto* encode_cmd = app.add_subcommand("encode", "Run the encoder on selected patches; write the zero-filled featuremap");
  std::string encode_cfg, encode_sel, encode_image, encode_out;
  encode_cmd->add_option("--config", encode_cfg, "Pipeline config JSON (default: built-in toy config)")
      ->check(CLI::ExistingFile);
  encode_cmd->add_option("--select", encode_sel, "PatchSet JSON (default: every patch)")->check(CLI::ExistingFile);
  encode_cmd->add_option("--image", encode_image, "PPM or raw tensor image")->required()->check(CLI::ExistingFile);
  encode_cmd->add_option("--out", encode_out, "Featuremap tensor file")->required();
  encode_cmd->callback([&] {
    const PipelineConfig cfg = encode_cfg.empty() ? PipelineConfig{} : pipeline_config_from_json(io::read_json(encode_cfg));
    const auto weights = init_weights(cfg.encoder, cfg.grid);
    const PatchSet sel = encode_sel.empty() ? PatchSet::all(cfg.grid)
                                            : io::patch_set_from_json(io::read_json(encode_sel), cfg.grid);
    const auto tokens = gather(patch_embed(io::read_image(encode_image), weights), sel);
    io::write_tensor(encode_out, scatter_zero_fill(transformer_forward(tokens, weights), cfg.grid));
  });

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "Decode a heatmap (or featuremap) into keypoints");
  std::string decode_heatmap_path, decode_feat, decode_cfg, decode_heatmap_out, decode_out;
  double decode_stride = kHeatmapStride;
  auto* heat_opt = decode_cmd->add_option("--heatmap", decode_heatmap_path, "Heatmap tensor (rows, cols, K)")
                       ->check(CLI::ExistingFile);
  auto* feat_opt = decode_cmd->add_option("--featuremap", decode_feat, "Featuremap tensor; runs the decoder head first")
                       ->check(CLI::ExistingFile);
  heat_opt->excludes(feat_opt);
  decode_cmd->add_option("--config", decode_cfg, "Pipeline config for --featuremap (default: toy)")
      ->check(CLI::ExistingFile);
  decode_cmd->add_option("--stride", decode_stride, "Pixels per heatmap cell for --heatmap")->capture_default_str();
  decode_cmd->add_option("--heatmap-out", decode_heatmap_out, "With --featuremap: also write the heatmap tensor");
  decode_cmd->add_option("--out", decode_out, "Keypoint JSON (default stdout)");
  decode_cmd->callback([&] {
    Heatmap h;
    double stride = decode_stride;
    if (!decode_feat.empty()) {
      const PipelineConfig cfg = decode_cfg.empty() ? PipelineConfig{} : pipeline_config_from_json(io::read_json(decode_cfg));
      h = decode_head(io::read_tensor(decode_feat), init_decoder_weights(cfg.decoder));
      stride = cfg.grid.patch_size() / 4.0;
      if (!decode_heatmap_out.empty()) io::write_tensor(decode_heatmap_out, io::channels_last(h));
    } else if (!decode_heatmap_path.empty()) {
      h = io::channels_first(io::read_tensor(decode_heatmap_path));
    } else {
      throw CLI::ValidationError("decode", "one of --heatmap or --featuremap is required");
    }
    emit(decode_out, dump(io::keypoints_to_json(decode_heatmap(h, stride), true)));
  });

  // flops
  auto* flops_cmd = app.add_subcommand("flops", "Analytic FLOP report (JSON on stdout, table on stderr)");
  std::string flops_model = "vitl", flops_sel_cfg, flops_kp;
  double flops_tokens = 0;
  flops_cmd->add_option("--model", flops_model, "vitb, vitl or toy")
      ->check(CLI::IsMember({"vitb", "vitl", "toy"}))
      ->capture_default_str();
  auto* tokens_opt = flops_cmd->add_option("--tokens", flops_tokens, "Token count N");
  auto* sel_cfg_opt = flops_cmd->add_option("--select-config", flops_sel_cfg, "Selection config JSON")
                          ->check(CLI::ExistingFile);
  auto* kp_opt = flops_cmd->add_option("--keypoints", flops_kp, "Keypoint corpus for --select-config")
                     ->check(CLI::ExistingFile);
  sel_cfg_opt->needs(kp_opt);
  kp_opt->needs(sel_cfg_opt);
  tokens_opt->excludes(sel_cfg_opt);
  flops_cmd->callback([&] {
    const ModelSpec model = model_preset(flops_model);
    double n = flops_tokens;
    if (!flops_sel_cfg.empty()) {
      const auto corpus = io::read_keypoint_corpus(flops_kp);
      n = effective_tokens(corpus, selection_config_from_json(io::read_json(flops_sel_cfg)), model.grid);
    } else if (tokens_opt->count() == 0) {
      n = model.grid.size();
    }
    const auto report = pipeline_flops(model.encoder, model.decoder, model.grid, n);
    print_flop_table(flops_model, report);
    std::cout << dump(flops_json(report));
  });

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "OKS AP and PCKh for paired prediction / ground-truth files");
  std::string metrics_pred, metrics_gt, metrics_sigmas, metrics_out;
  std::optional<double> metrics_scale, metrics_head;
  double metrics_tau = 0.5;
  metrics_cmd->add_option("--pred", metrics_pred, "Predicted keypoints (object or array)")
      ->required()
      ->check(CLI::ExistingFile);
  metrics_cmd->add_option("--gt", metrics_gt, "Ground-truth keypoints (object or array)")
      ->required()
      ->check(CLI::ExistingFile);
  metrics_cmd->add_option("--scale", metrics_scale, "Object scale for every instance (default: per-object field or box)");
  metrics_cmd->add_option("--head-size", metrics_head, "Head size for every instance (default: per-object field)");
  metrics_cmd->add_option("--tau", metrics_tau, "PCKh threshold fraction")->capture_default_str();
  metrics_cmd->add_option("--sigmas", metrics_sigmas, "JSON with a \"sigmas\" array (default: COCO 17)")
      ->check(CLI::ExistingFile);
  metrics_cmd->add_option("--out", metrics_out, "Report path (default stdout)");
  metrics_cmd->callback([&] {
    const auto pred_objs = io::read_keypoint_objects(metrics_pred);
    const auto gt_objs = io::read_keypoint_objects(metrics_gt);
    if (pred_objs.size() != gt_objs.size()) throw io::FormatError("prediction and ground-truth counts differ");
    const auto sigmas = metrics_sigmas.empty() ? coco17_sigmas()
                                               : io::read_json(metrics_sigmas).at("sigmas").get<std::vector<double>>();
    const auto falloff = falloff_from_sigmas(sigmas);

    std::vector<KeypointPrediction> preds, gts;
    std::vector<double> scales;
    double correct = 0, visible = 0;
    bool have_head = true;
    for (std::size_t i = 0; i < gt_objs.size(); ++i) {
      preds.push_back(io::keypoints_from_json(pred_objs[i]));
      gts.push_back(io::keypoints_from_json(gt_objs[i]));
      scales.push_back(object_scale(gt_objs[i], gts.back(), metrics_scale));
      std::optional<double> head = metrics_head;
      if (!head && gt_objs[i].contains("head_size")) head = gt_objs[i]["head_size"].get<double>();
      if (!head) {
        have_head = false;
        continue;
      }
      const auto v = static_cast<double>(gts.back().visible_count());
      correct += pckh(preds.back(), gts.back(), *head, metrics_tau) / 100.0 * v;
      visible += v;
    }
    const auto result = evaluate_oks(preds, gts, falloff, scales);
    double mean = 0;
    for (double s : result.scores) mean += s;
    mean /= static_cast<double>(result.scores.size());
    json report{{"instances", result.scores.size()}, {"oks_mean", mean}, {"ap", result.ap}};
    report["pckh"] = have_head ? json(100.0 * correct / visible) : json(nullptr);
    emit(metrics_out, dump(report));
  });

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Token budget sweep over a synthetic corpus (CSV)");
  BenchConfig bench;
  std::string bench_n = "0:16", bench_method = "neighbors", bench_out;
  bool bench_no_skel = false;
  bench_cmd->add_option("--n", bench_n, "lo:hi (inclusive) or a comma-separated list")->capture_default_str();
  bench_cmd->add_option("--samples", bench.samples, "Synthetic corpus size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--noise", bench.sigma_noise, "Guide noise sigma in pixels")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  bench_cmd->add_option("--model", bench.model, "vitb, vitl or toy")
      ->check(CLI::IsMember({"vitb", "vitl", "toy"}))
      ->capture_default_str();
  bench_cmd->add_option("--method", bench_method, "none, neighbors or skeleton")
      ->check(CLI::IsMember({"none", "neighbors", "skeleton"}))
      ->capture_default_str();
  bench_cmd->add_flag("--no-skeleton-neighbors", bench_no_skel, "Skeleton method: skip the neighbour expansion");
  bench_cmd->add_option("--seed", bench.seed, "Corpus seed")->capture_default_str();
  bench_cmd->add_flag("--timing", bench.timing, "Run the forward pass per sample and record wall time");
  bench_cmd->add_option("--out", bench_out, "CSV path (default stdout)");
  bench_cmd->callback([&] {
    bench.n_values = parse_n_values(bench_n);
    bench.method = parse_selection_method(bench_method);
    bench.skeleton_neighbors = !bench_no_skel;
    emit(bench_out, bench_csv(bench_sweep(bench)));
  });

  // viz
  auto* viz_cmd = app.add_subcommand("viz", "Draw selected patches over an image (PPM)");
  GridFlags viz_grid;
  SelectionFlags viz_flags;
  std::string viz_kp, viz_image, viz_out;
  viz_grid.attach(viz_cmd);
  viz_flags.attach(viz_cmd);
  viz_cmd->add_option("--keypoints", viz_kp, "Keypoint JSON")->required()->check(CLI::ExistingFile);
  viz_cmd->add_option("--image", viz_image, "Background image (default: mid grey)")->check(CLI::ExistingFile);
  viz_cmd->add_option("--out", viz_out, "Output PPM")->required();
  viz_cmd->callback([&] {
    const auto grid = viz_grid.grid();
    const Image bg = viz_image.empty() ? Image(static_cast<std::size_t>(grid.image_height()),
                                               static_cast<std::size_t>(grid.image_width()), 3, 0.5)
                                       : io::read_image(viz_image);
    io::write_ppm(viz_out, render_overlay(bg, read_single(viz_kp), grid, viz_flags.config()));
  });

  // run
  auto* run_cmd = app.add_subcommand("run", "Full pipeline: select, encode, decode");
  std::string run_image, run_kp, run_cfg, run_out, run_heatmap;
  run_cmd->add_option("--image", run_image, "PPM or raw tensor image")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--keypoints", run_kp, "Guide keypoint JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--config", run_cfg, "Pipeline config JSON (default: built-in toy config)")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--heatmap", run_heatmap, "Also write the heatmap tensor (rows, cols, K)");
  run_cmd->add_option("--out", run_out, "Result JSON (default stdout)");
  run_cmd->callback([&] {
    const PipelineConfig cfg = run_cfg.empty() ? PipelineConfig{} : pipeline_config_from_json(io::read_json(run_cfg));
    const auto r = run_pipeline(io::read_image(run_image), read_single(run_kp), cfg);
    if (!run_heatmap.empty()) io::write_tensor(run_heatmap, io::channels_last(r.heatmap));
    json out = io::keypoints_to_json(r.keypoints, true);
    out["selection"] = io::patch_set_to_json(r.selection);
    out["flops"] = flops_json(r.flops);
    emit(run_out, dump(out));
  });

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic pose sample");
  GridFlags synth_grid;
  std::uint64_t synth_seed = 0;
  int synth_k = 17;
  double synth_noise = 0;
  std::string synth_image, synth_kp, synth_guide;
  synth_grid.attach(synth_cmd);
  synth_cmd->add_option("--seed", synth_seed, "Sample seed")->capture_default_str();
  synth_cmd->add_option("--keypoint-count", synth_k, "Joints in the figure (17 uses the COCO layout)")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  synth_cmd->add_option("--image", synth_image, "Output PPM")->required();
  synth_cmd->add_option("--keypoints", synth_kp, "Output ground-truth keypoint JSON")->required();
  synth_cmd->add_option("--guide", synth_guide, "Also write a noisy guide with --noise sigma");
  synth_cmd->add_option("--noise", synth_noise, "Guide noise sigma in pixels")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth_cmd->callback([&] {
    const auto grid = synth_grid.grid();
    const auto s = synth_pose(synth_seed, grid, synth_k);
    io::write_ppm(synth_image, s.image);
    io::write_text(synth_kp, dump(io::keypoints_to_json(s.keypoints)));
    if (!synth_guide.empty())
      io::write_text(synth_guide, dump(io::keypoints_to_json(noisy_oracle(s.keypoints, synth_noise, SplitMix64(synth_seed).split(1).next(), grid))));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

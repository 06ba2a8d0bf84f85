#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsepose/grid.hpp"
#include "sparsepose/tensor.hpp"

namespace sparsepose::io {

/// Malformed or unreadable input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Keypoints: {"keypoints": [{"x": <number>, "y": <number>, "v": <0|1>}, ...]}
// Optional per-point "score"; optional per-object "scale" and "head_size"
// are read by the metrics tooling.
nlohmann::json keypoints_to_json(const KeypointPrediction& kp, bool with_scores = false);
KeypointPrediction keypoints_from_json(const nlohmann::json& j);

/// A single keypoint object, or an array of them.
std::vector<nlohmann::json> read_keypoint_objects(const std::filesystem::path& path);
std::vector<KeypointPrediction> read_keypoint_corpus(const std::filesystem::path& path);

/// [[a, b], ...]
SkeletonPairs pairs_from_json(const nlohmann::json& j);
nlohmann::json pairs_to_json(const SkeletonPairs& pairs);

/// Flat index array, validated against the grid.
PatchSet patch_set_from_json(const nlohmann::json& j, const PatchGrid& grid);
nlohmann::json patch_set_to_json(const PatchSet& set);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// Raw tensor files: 16-byte little-endian header of four uint32 words
// (magic "SPTF", rows, cols, channels) followed by rows*cols*channels
// float32 values in row-major (rows, cols, channels) order.
inline constexpr std::uint32_t kTensorMagic = 0x46545053;  // bytes "SPTF"

void write_tensor(const std::filesystem::path& path, const Tensor3& hwc);
Tensor3 read_tensor(const std::filesystem::path& path);

/// (K, H, W) <-> (H, W, K) for heatmap serialisation.
Tensor3 channels_last(const Tensor3& chw);
Tensor3 channels_first(const Tensor3& hwc);

/// Binary (P6) or ASCII (P3) PPM, scaled to [0, 1].
Image read_ppm(const std::filesystem::path& path);
/// P6 with values clamped to [0, 1] and rounded to 8 bits.
void write_ppm(const std::filesystem::path& path, const Image& image);

/// PPM when the extension is .ppm, raw tensor file otherwise.
Image read_image(const std::filesystem::path& path);

}  // namespace sparsepose::io

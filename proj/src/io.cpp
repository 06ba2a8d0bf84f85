#include "sparsepose/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sparsepose::io {

static_assert(std::endian::native == std::endian::little, "tensor files assume a little-endian host");

namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double number_field(const nlohmann::json& o, const char* key) {
  if (!o.contains(key) || !o[key].is_number()) throw FormatError(std::string("keypoint is missing numeric '") + key + "'");
  return o[key].get<double>();
}

}  // namespace

nlohmann::json keypoints_to_json(const KeypointPrediction& kp, bool with_scores) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : kp) {
    nlohmann::json o = {{"x", p.x}, {"y", p.y}, {"v", p.visible ? 1 : 0}};
    if (with_scores) o["score"] = p.score;
    arr.push_back(std::move(o));
  }
  return {{"keypoints", std::move(arr)}};
}

KeypointPrediction keypoints_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("keypoints") || !j["keypoints"].is_array())
    throw FormatError("expected an object with a \"keypoints\" array");
  std::vector<Keypoint> pts;
  for (const auto& o : j["keypoints"]) {
    if (!o.is_object()) throw FormatError("keypoint entries must be objects");
    Keypoint k;
    k.x = number_field(o, "x");
    k.y = number_field(o, "y");
    if (o.contains("v")) {
      const int v = o["v"].get<int>();
      if (v != 0 && v != 1) throw FormatError("keypoint visibility 'v' must be 0 or 1");
      k.visible = v == 1;
    }
    if (o.contains("score")) k.score = o["score"].get<double>();
    pts.push_back(k);
  }
  try {
    return KeypointPrediction(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

std::vector<nlohmann::json> read_keypoint_objects(const std::filesystem::path& path) {
  const auto j = read_json(path);
  if (j.is_array()) return std::vector<nlohmann::json>(j.begin(), j.end());
  return {j};
}

std::vector<KeypointPrediction> read_keypoint_corpus(const std::filesystem::path& path) {
  std::vector<KeypointPrediction> out;
  for (const auto& o : read_keypoint_objects(path)) out.push_back(keypoints_from_json(o));
  return out;
}

SkeletonPairs pairs_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw FormatError("skeleton pairs must be a JSON array of [a, b]");
  std::vector<SkeletonPairs::Pair> pairs;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw FormatError("skeleton pair must be a two-element array");
    pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
  }
  try {
    return SkeletonPairs(std::move(pairs));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

nlohmann::json pairs_to_json(const SkeletonPairs& pairs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [a, b] : pairs) arr.push_back({a, b});
  return arr;
}

PatchSet patch_set_from_json(const nlohmann::json& j, const PatchGrid& grid) {
  if (!j.is_array()) throw FormatError("patch set must be a JSON array of flat indices");
  std::vector<PatchIndex> idx;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw FormatError("patch indices must be integers");
    idx.push_back(v.get<PatchIndex>());
  }
  return PatchSet(std::move(idx), grid);
}

nlohmann::json patch_set_to_json(const PatchSet& set) {
  return nlohmann::json(std::vector<PatchIndex>(set.begin(), set.end()));
}

nlohmann::json read_json(const std::filesystem::path& path) {
  const std::string text = read_all(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

void write_tensor(const std::filesystem::path& path, const Tensor3& hwc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  const std::array<std::uint32_t, 4> header = {kTensorMagic, static_cast<std::uint32_t>(hwc.dim0()),
                                               static_cast<std::uint32_t>(hwc.dim1()),
                                               static_cast<std::uint32_t>(hwc.dim2())};
  out.write(reinterpret_cast<const char*>(header.data()), sizeof(header));
  std::vector<float> buf(hwc.size());
  std::transform(hwc.data().begin(), hwc.data().end(), buf.begin(), [](double v) { return static_cast<float>(v); });
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Tensor3 read_tensor(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  if (bytes.size() < 16) throw FormatError(path.string() + ": truncated tensor header");
  std::array<std::uint32_t, 4> header{};
  std::memcpy(header.data(), bytes.data(), sizeof(header));
  if (header[0] != kTensorMagic) throw FormatError(path.string() + ": bad tensor magic");
  const std::size_t n = std::size_t{header[1]} * header[2] * header[3];
  if (bytes.size() != 16 + n * sizeof(float)) throw FormatError(path.string() + ": tensor payload size mismatch");
  std::vector<float> buf(n);
  std::memcpy(buf.data(), bytes.data() + 16, n * sizeof(float));
  Tensor3 t(header[1], header[2], header[3]);
  std::copy(buf.begin(), buf.end(), t.data().begin());
  return t;
}

Tensor3 channels_last(const Tensor3& chw) {
  Tensor3 out(chw.dim1(), chw.dim2(), chw.dim0());
  for (std::size_t c = 0; c < chw.dim0(); ++c)
    for (std::size_t y = 0; y < chw.dim1(); ++y)
      for (std::size_t x = 0; x < chw.dim2(); ++x) out(y, x, c) = chw(c, y, x);
  return out;
}

Tensor3 channels_first(const Tensor3& hwc) {
  Tensor3 out(hwc.dim2(), hwc.dim0(), hwc.dim1());
  for (std::size_t y = 0; y < hwc.dim0(); ++y)
    for (std::size_t x = 0; x < hwc.dim1(); ++x)
      for (std::size_t c = 0; c < hwc.dim2(); ++c) out(c, y, x) = hwc(y, x, c);
  return out;
}

Image read_ppm(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  std::size_t pos = 0;
  // Header tokens, skipping whitespace and '#' comments.
  auto token = [&]() {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw FormatError(path.string() + ": truncated PPM header");
    return bytes.substr(start, pos - start);
  };
  auto number = [&]() {
    const std::string t = token();
    try {
      return std::stoi(t);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad PPM header field '" + t + "'");
    }
  };
  const std::string magic = token();
  if (magic != "P6" && magic != "P3") throw FormatError(path.string() + ": not a P3/P6 PPM");
  const int width = number();
  const int height = number();
  const int maxval = number();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
    throw FormatError(path.string() + ": unsupported PPM dimensions or depth");

  Image img(static_cast<std::size_t>(height), static_cast<std::size_t>(width), 3);
  auto pixels = img.data();
  if (magic == "P6") {
    ++pos;  // single whitespace byte after maxval
    if (bytes.size() < pos + pixels.size()) throw FormatError(path.string() + ": truncated PPM data");
    for (std::size_t i = 0; i < pixels.size(); ++i)
      pixels[i] = static_cast<unsigned char>(bytes[pos + i]) / static_cast<double>(maxval);
  } else {
    for (double& v : pixels) v = number() / static_cast<double>(maxval);
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  if (image.dim2() != 3) throw std::invalid_argument("write_ppm needs a 3-channel image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "P6\n" << image.dim1() << ' ' << image.dim0() << "\n255\n";
  std::string buf(image.size(), '\0');
  const auto px = image.data();
  for (std::size_t i = 0; i < px.size(); ++i)
    buf[i] = static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(px[i], 0.0, 1.0) * 255.0)));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Image read_image(const std::filesystem::path& path) {
  if (path.extension() == ".ppm") return read_ppm(path);
  Tensor3 t = read_tensor(path);
  if (t.dim2() != 3) throw FormatError(path.string() + ": image tensors must have 3 channels");
  return t;
}

}  // namespace sparsepose::io

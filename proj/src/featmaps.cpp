#include "tstdd/featmaps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tstdd/binary_io.hpp"
#include "tstdd/error.hpp"

namespace tstdd {

std::string_view to_string(Stream s) {
  switch (s) {
    case Stream::local_temporal: return "lt";
    case Stream::spatial_temporal: return "st";
    case Stream::global_temporal: return "gt";
  }
  return "?";
}

Stream parse_stream(std::string_view name) {
  for (Stream s : kAllStreams) {
    if (to_string(s) == name) return s;
  }
  fail(ErrorKind::invalid_argument, "unknown stream '" + std::string(name) + "' (expected lt, st or gt)");
}

void FeatureMapStack::validate() const {
  require(height > 0 && width > 0 && length > 0 && channels >= 1,
          "feature maps '" + layer_id + "': dimensions must be positive");
  require(map_ratio > 0.0 && map_ratio <= 1.0, "feature maps '" + layer_id + "': map ratio must lie in (0, 1]");
  require(values.size() == std::size_t(height) * width * length * channels,
          "feature maps '" + layer_id + "': value count does not match dimensions");
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "feature maps '" + layer_id + "': non-finite value");
  }
}

void FilterBankConfig::validate() const {
  require(stages >= 1, "filterbank: stages must be >= 1");
  require(orientations >= 1, "filterbank: orientations must be >= 1");
  require(max_channels >= 1, "filterbank: max_channels must be >= 1");
  require(tilt >= 0.0, "filterbank: tilt must be >= 0");
}

std::array<double, 9> filter_kernel(const FilterBankConfig& cfg, int k) {
  require(k >= 0 && k < cfg.orientations, "filter_kernel: orientation index out of range");
  static constexpr double kBinomial[3] = {1.0, 2.0, 1.0};
  const double theta = 2.0 * std::numbers::pi * k / cfg.orientations;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  std::array<double, 9> kernel{};
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const double blur = kBinomial[dx + 1] * kBinomial[dy + 1] / 16.0;
      kernel[(dy + 1) * 3 + (dx + 1)] = blur * (1.0 + cfg.tilt * (dx * c + dy * s));
    }
  }
  return kernel;
}

namespace {

// One stage: correlate + abs at full resolution, then 2x2 max pool into `out` at frame z.
void run_stage_frame(std::span<const double> in_frames, int in_w, int in_h, int in_channels, int in_length, int z,
                     const std::vector<std::array<double, 9>>& kernels, FeatureMapStack& out) {
  const int orientations = static_cast<int>(kernels.size());
  const std::size_t in_frame = std::size_t(in_w) * in_h;
  std::vector<double> response(in_frame);
  for (int o = 0; o < out.channels; ++o) {
    const int c = o / orientations;
    const int k = o % orientations;
    if (c >= in_channels) break;
    const double* src = in_frames.data() + (std::size_t(c) * in_length + z) * in_frame;
    const auto& kern = kernels[k];
    for (int y = 0; y < in_h; ++y) {
      const int ys[3] = {std::max(y - 1, 0), y, std::min(y + 1, in_h - 1)};
      for (int x = 0; x < in_w; ++x) {
        const int xs[3] = {std::max(x - 1, 0), x, std::min(x + 1, in_w - 1)};
        double acc = 0.0;
        for (int j = 0; j < 3; ++j) {
          const double* row = src + std::size_t(ys[j]) * in_w;
          acc += kern[j * 3 + 0] * row[xs[0]] + kern[j * 3 + 1] * row[xs[1]] + kern[j * 3 + 2] * row[xs[2]];
        }
        response[std::size_t(y) * in_w + x] = std::abs(acc);
      }
    }
    for (int py = 0; py < out.height; ++py) {
      for (int px = 0; px < out.width; ++px) {
        double m = 0.0;
        for (int y = 2 * py; y < std::min(2 * py + 2, in_h); ++y)
          for (int x = 2 * px; x < std::min(2 * px + 2, in_w); ++x) m = std::max(m, response[std::size_t(y) * in_w + x]);
        out.at(px, py, z, o) = m;
      }
    }
  }
}

}  // namespace

std::vector<FeatureMapStack> filterbank_extract(std::span<const ByteImage> inputs, const FilterBankConfig& cfg,
                                                Stream stream) {
  cfg.validate();
  require(!inputs.empty(), "filterbank_extract: no input frames");
  const int w = inputs[0].width;
  const int h = inputs[0].height;
  const int ch = inputs[0].channels;
  require(w > 0 && h > 0 && ch > 0, "filterbank_extract: empty input image");
  for (const ByteImage& img : inputs) {
    require(img.width == w && img.height == h && img.channels == ch,
            "filterbank_extract: inputs must share dimensions and channel count");
  }
  const int length = static_cast<int>(inputs.size());

  std::vector<std::array<double, 9>> kernels;
  for (int k = 0; k < cfg.orientations; ++k) kernels.push_back(filter_kernel(cfg, k));

  // Stage-0 tensor in the same (x, y, z, n) layout.
  std::vector<double> current(std::size_t(w) * h * length * ch);
  for (int n = 0; n < ch; ++n)
    for (int z = 0; z < length; ++z) {
      auto plane = inputs[z].plane(n);
      std::copy(plane.begin(), plane.end(), current.begin() + (std::size_t(n) * length + z) * w * h);
    }
  int cur_w = w, cur_h = h, cur_ch = ch;

  std::vector<FeatureMapStack> stages;
  stages.reserve(cfg.stages);
  for (int m = 1; m <= cfg.stages; ++m) {
    const long long wanted = static_cast<long long>(cur_ch) * cfg.orientations;
    const int out_ch = static_cast<int>(std::min<long long>(wanted, cfg.max_channels));
    FeatureMapStack out(stream, "stage" + std::to_string(m), (cur_h + 1) / 2, (cur_w + 1) / 2, length, out_ch,
                        std::ldexp(1.0, -m));
    for (int z = 0; z < length; ++z) run_stage_frame(current, cur_w, cur_h, cur_ch, length, z, kernels, out);
    current = out.values;
    cur_w = out.width;
    cur_h = out.height;
    cur_ch = out.channels;
    stages.push_back(std::move(out));
  }
  return stages;
}

void save_feature_maps(const std::filesystem::path& path, const FeatureMapStack& stack) {
  stack.validate();
  std::ostringstream buf;
  BinaryWriter out(buf);
  out.magic("FMAP");
  out.u8(1);
  out.u8(static_cast<std::uint8_t>(stack.stream));
  out.text(stack.layer_id);
  out.u32(static_cast<std::uint32_t>(stack.height));
  out.u32(static_cast<std::uint32_t>(stack.width));
  out.u32(static_cast<std::uint32_t>(stack.length));
  out.u32(static_cast<std::uint32_t>(stack.channels));
  out.f64(stack.map_ratio);
  for (double v : stack.values) out.f32(static_cast<float>(v));
  write_file_atomically(path, buf.str());
}

FeatureMapStack load_feature_maps(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::io, "cannot open feature-map file: " + path.string());
  BinaryReader in(file, path.string());
  in.expect_magic("FMAP");
  const std::uint8_t version = in.u8();
  if (version != 1) fail(ErrorKind::format, path.string() + ": unsupported FMAP version " + std::to_string(version));
  const std::uint8_t tag = in.u8();
  if (tag > 2) fail(ErrorKind::format, path.string() + ": unknown stream tag " + std::to_string(tag));
  FeatureMapStack stack;
  stack.stream = static_cast<Stream>(tag);
  stack.layer_id = in.text();
  const std::uint32_t h = in.u32(), w = in.u32(), l = in.u32(), n = in.u32();
  stack.map_ratio = in.f64();
  if (!(stack.map_ratio > 0.0 && stack.map_ratio <= 1.0)) {
    fail(ErrorKind::format, path.string() + ": map ratio must lie in (0, 1]");
  }
  if (h == 0 || w == 0 || l == 0 || n == 0) fail(ErrorKind::format, path.string() + ": zero dimension");
  const std::uint64_t count = std::uint64_t(h) * w * l * n;
  if (count > (1ull << 32)) fail(ErrorKind::format, path.string() + ": tensor too large");
  stack.height = static_cast<int>(h);
  stack.width = static_cast<int>(w);
  stack.length = static_cast<int>(l);
  stack.channels = static_cast<int>(n);
  stack.values.resize(count);
  for (double& v : stack.values) {
    v = in.f32();
    if (!std::isfinite(v)) fail(ErrorKind::format, path.string() + ": non-finite value");
  }
  if (!in.at_end()) fail(ErrorKind::format, path.string() + ": trailing data (record count mismatch)");
  return stack;
}

FeatureMapStack spatiotemporal_normalize(const FeatureMapStack& c) {
  FeatureMapStack out = c;
  const std::size_t block = c.channel_size();
  for (int n = 0; n < c.channels; ++n) {
    const auto first = out.values.begin() + std::size_t(n) * block;
    const double m = *std::max_element(first, first + block);
    if (m <= kNormEpsilon) {
      std::fill(first, first + block, 0.0);
    } else {
      std::transform(first, first + block, first, [m](double v) { return v / m; });
    }
  }
  return out;
}

FeatureMapStack channel_normalize(const FeatureMapStack& c) {
  FeatureMapStack out = c;
  const std::size_t block = c.channel_size();
  for (std::size_t pos = 0; pos < block; ++pos) {
    double m = c.values[pos];
    for (int n = 1; n < c.channels; ++n) m = std::max(m, c.values[std::size_t(n) * block + pos]);
    for (int n = 0; n < c.channels; ++n) {
      double& v = out.values[std::size_t(n) * block + pos];
      v = m <= kNormEpsilon ? 0.0 : v / m;
    }
  }
  return out;
}

}  // namespace tstdd

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tstdd/image.hpp"

namespace tstdd {

enum class Stream : std::uint8_t { local_temporal = 0, spatial_temporal = 1, global_temporal = 2 };

inline constexpr std::array<Stream, 3> kAllStreams = {Stream::local_temporal, Stream::spatial_temporal,
                                                      Stream::global_temporal};

std::string_view to_string(Stream s);        // "lt", "st", "gt"
Stream parse_stream(std::string_view name);

/// H_m x W_m x L x N_m real tensor for one layer of one stream.
/// Storage order is x fastest, then y, then z (frame), then n (channel).
struct FeatureMapStack {
  Stream stream = Stream::local_temporal;
  std::string layer_id;
  int height = 0;
  int width = 0;
  int length = 0;
  int channels = 0;
  double map_ratio = 1.0;
  std::vector<double> values;

  FeatureMapStack() = default;
  FeatureMapStack(Stream s, std::string layer, int h, int w, int l, int n, double ratio)
      : stream(s), layer_id(std::move(layer)), height(h), width(w), length(l), channels(n), map_ratio(ratio),
        values(std::size_t(h) * w * l * n, 0.0) {}

  std::size_t frame_size() const { return std::size_t(width) * height; }
  std::size_t channel_size() const { return frame_size() * length; }
  std::size_t index(int x, int y, int z, int n) const {
    return ((std::size_t(n) * length + z) * height + y) * width + x;
  }
  double at(int x, int y, int z, int n) const { return values[index(x, y, z, n)]; }
  double& at(int x, int y, int z, int n) { return values[index(x, y, z, n)]; }

  /// Throws if any invariant fails (finite values, ratio in (0, 1], sizes consistent).
  void validate() const;
};

// ---------------------------------------------------------------------------
// Built-in provider

struct FilterBankConfig {
  int stages = 2;          // M
  int orientations = 8;
  int max_channels = 64;   // later channels are truncated
  double tilt = 0.7;       // weight of the directional term in each kernel

  void validate() const;
};

/// 3x3 kernel k of the bank, row-major with (dx, dy) in {-1, 0, 1}^2:
/// binomial blur weighted by (1 + tilt * (dx cos t + dy sin t)), t = 2 pi k / orientations.
/// Kernels are non-negative (for tilt < 1/sqrt 2), so responses keep the local level
/// while also encoding the signed gradient along the kernel's direction.
std::array<double, 9> filter_kernel(const FilterBankConfig& cfg, int k);

/// Stage m cross-correlates every input channel with each kernel (replicate borders),
/// takes absolute values, then 2x2 max pools, giving map ratio 2^-m. Output channel
/// index is input_channel * orientations + k, truncated to max_channels.
/// All inputs must share width, height and channel count.
std::vector<FeatureMapStack> filterbank_extract(std::span<const ByteImage> inputs, const FilterBankConfig& cfg,
                                                Stream stream);

// Feature-map file: "FMAP", u8 version, u8 stream, length-prefixed layer id,
// u32 H, W, L, N, f64 ratio, then values as f32 in storage order.
void save_feature_maps(const std::filesystem::path& path, const FeatureMapStack& stack);
FeatureMapStack load_feature_maps(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Normalization

inline constexpr double kNormEpsilon = 1e-12;

/// Divides each channel by its maximum over the whole (x, y, z) extent.
FeatureMapStack spatiotemporal_normalize(const FeatureMapStack& c);

/// Divides each (x, y, z) position by its maximum across channels.
FeatureMapStack channel_normalize(const FeatureMapStack& c);

}  // namespace tstdd

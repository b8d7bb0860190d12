#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tstdd/video_io.hpp"

namespace tstdd {

/// Dense displacement field: pixel (x, y) of `prev` maps to (x + u, y + v) in `next`.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> u;
  std::vector<double> v;

  FlowField() = default;
  FlowField(int w, int h) : width(w), height(h), u(std::size_t(w) * h, 0.0), v(std::size_t(w) * h, 0.0) {}

  std::size_t index(int x, int y) const { return std::size_t(y) * width + x; }
};

/// Byte-quantized flow ("OF image"): u, v centered at 128 and a magnitude plane.
struct FlowImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> u;
  std::vector<std::uint8_t> v;
  std::vector<std::uint8_t> magnitude;
};

struct FlowConfig {
  int pyramid_levels = 3;
  double smoothness_weight = 15.0;
  int iterations_per_level = 100;
  double quantization_bound = 20.0;

  void validate() const;
};

/// Coarse-to-fine Horn-Schunck. Each level warps `next` toward `prev` with the upsampled
/// coarser estimate and runs a fixed number of Jacobi sweeps on the linearized energy.
/// Bit-identical output for identical inputs.
FlowField compute_flow(const Frame& prev, const Frame& next, const FlowConfig& cfg = {});

/// channel_u = clamp(round(128 + 127 u / bound)), channel_mag = clamp(round(255 |w| / (bound sqrt 2))).
FlowImage quantize_flow(const FlowField& flow, double bound);

/// L - 1 fields; entry t covers frames (t, t + 1). Pairs are computed on `threads` workers.
std::vector<FlowField> flow_sequence(const VideoClip& clip, const FlowConfig& cfg = {}, int threads = 1);

// Flow cache file: "OFL1", u32 width, u32 height, u-plane then v-plane as f32, little-endian.
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

}  // namespace tstdd

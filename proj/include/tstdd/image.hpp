#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace tstdd {

/// Planar multi-channel byte image: channel c occupies data[c*w*h, (c+1)*w*h), row-major.
struct ByteImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  ByteImage() = default;
  ByteImage(int w, int h, int c) : width(w), height(h), channels(c), data(std::size_t(w) * h * c, 0) {}

  std::size_t plane_size() const { return std::size_t(width) * height; }

  std::span<std::uint8_t> plane(int c) {
    assert(c >= 0 && c < channels);
    return {data.data() + plane_size() * c, plane_size()};
  }
  std::span<const std::uint8_t> plane(int c) const {
    assert(c >= 0 && c < channels);
    return {data.data() + plane_size() * c, plane_size()};
  }

  std::uint8_t at(int c, int x, int y) const { return data[plane_size() * c + std::size_t(y) * width + x]; }
};

// Round half-up, the single rounding convention used for byte mappings and map lookups.
inline double round_half_up(double value) { return std::floor(value + 0.5); }

}  // namespace tstdd

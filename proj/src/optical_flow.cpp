#include "tstdd/optical_flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tstdd/binary_io.hpp"
#include "tstdd/error.hpp"
#include "tstdd/image.hpp"
#include "tstdd/parallel.hpp"

namespace tstdd {

void FlowConfig::validate() const {
  require(pyramid_levels >= 1, "flow: pyramid_levels must be >= 1");
  require(smoothness_weight > 0.0, "flow: smoothness_weight must be > 0");
  require(iterations_per_level >= 0, "flow: iterations_per_level must be >= 0");
  require(quantization_bound > 0.0, "flow: quantization_bound must be > 0");
}

namespace {

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> d;

  Plane() = default;
  Plane(int width, int height) : w(width), h(height), d(std::size_t(width) * height, 0.0) {}

  double at(int x, int y) const { return d[std::size_t(y) * w + x]; }
  double& at(int x, int y) { return d[std::size_t(y) * w + x]; }
  // Replicate-edge access.
  double clamped(int x, int y) const { return at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); }

  double bilinear(double x, double y) const {
    x = std::clamp(x, 0.0, double(w - 1));
    y = std::clamp(y, 0.0, double(h - 1));
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    return (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x1, y0)) + fy * ((1 - fx) * at(x0, y1) + fx * at(x1, y1));
  }
};

Plane to_plane(const Frame& f) {
  Plane p(f.width, f.height);
  for (std::size_t i = 0; i < p.d.size(); ++i) p.d[i] = f.pixels[i];
  return p;
}

Plane binomial_smooth(const Plane& in) {
  static constexpr double k[3] = {0.25, 0.5, 0.25};
  Plane tmp(in.w, in.h);
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < in.w; ++x)
      tmp.at(x, y) = k[0] * in.clamped(x - 1, y) + k[1] * in.at(x, y) + k[2] * in.clamped(x + 1, y);
  Plane out(in.w, in.h);
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < in.w; ++x)
      out.at(x, y) = k[0] * tmp.clamped(x, y - 1) + k[1] * tmp.at(x, y) + k[2] * tmp.clamped(x, y + 1);
  return out;
}

Plane downsample(const Plane& in) {
  Plane out((in.w + 1) / 2, (in.h + 1) / 2);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      const int sx = 2 * x;
      const int sy = 2 * y;
      out.at(x, y) = 0.25 * (in.clamped(sx, sy) + in.clamped(sx + 1, sy) + in.clamped(sx, sy + 1) +
                             in.clamped(sx + 1, sy + 1));
    }
  }
  return out;
}

// Flow values scale with the resolution ratio.
Plane upsample_flow(const Plane& coarse, int w, int h, double scale) {
  Plane out(w, h);
  const double rx = double(coarse.w) / w;
  const double ry = double(coarse.h) / h;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = scale * coarse.bilinear((x + 0.5) * rx - 0.5, (y + 0.5) * ry - 0.5);
  return out;
}

// Horn-Schunck neighbourhood average: 1/6 for edge neighbours, 1/12 for diagonals.
double neighbour_average(const Plane& p, int x, int y) {
  return (p.clamped(x - 1, y) + p.clamped(x + 1, y) + p.clamped(x, y - 1) + p.clamped(x, y + 1)) / 6.0 +
         (p.clamped(x - 1, y - 1) + p.clamped(x + 1, y - 1) + p.clamped(x - 1, y + 1) + p.clamped(x + 1, y + 1)) /
             12.0;
}

void refine_level(const Plane& i1, const Plane& i2, Plane& u, Plane& v, const FlowConfig& cfg) {
  const int w = i1.w;
  const int h = i1.h;
  Plane gx(w, h), gy(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      gx.at(x, y) = 0.5 * (i2.clamped(x + 1, y) - i2.clamped(x - 1, y));
      gy.at(x, y) = 0.5 * (i2.clamped(x, y + 1) - i2.clamped(x, y - 1));
    }
  }
  // Linearize I2 around the current estimate (u0, v0).
  Plane ix(w, h), iy(w, h), it(w, h), denom(w, h);
  const Plane u0 = u;
  const Plane v0 = v;
  const double alpha2 = cfg.smoothness_weight;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double wx = x + u0.at(x, y);
      const double wy = y + v0.at(x, y);
      ix.at(x, y) = gx.bilinear(wx, wy);
      iy.at(x, y) = gy.bilinear(wx, wy);
      it.at(x, y) = i2.bilinear(wx, wy) - i1.at(x, y);
      denom.at(x, y) = alpha2 + ix.at(x, y) * ix.at(x, y) + iy.at(x, y) * iy.at(x, y);
    }
  }
  Plane next_u(w, h), next_v(w, h);
  for (int iter = 0; iter < cfg.iterations_per_level; ++iter) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double ub = neighbour_average(u, x, y);
        const double vb = neighbour_average(v, x, y);
        const double gxv = ix.at(x, y);
        const double gyv = iy.at(x, y);
        const double residual = gxv * (ub - u0.at(x, y)) + gyv * (vb - v0.at(x, y)) + it.at(x, y);
        const double step = residual / denom.at(x, y);
        next_u.at(x, y) = ub - gxv * step;
        next_v.at(x, y) = vb - gyv * step;
      }
    }
    std::swap(u.d, next_u.d);
    std::swap(v.d, next_v.d);
  }
}

constexpr int kMinPyramidSide = 4;

}  // namespace

FlowField compute_flow(const Frame& prev, const Frame& next, const FlowConfig& cfg) {
  cfg.validate();
  if (prev.width != next.width || prev.height != next.height) {
    fail(ErrorKind::invalid_argument, "compute_flow: frame dimensions differ (" + std::to_string(prev.width) + "x" +
                                          std::to_string(prev.height) + " vs " + std::to_string(next.width) + "x" +
                                          std::to_string(next.height) + ")");
  }
  std::vector<Plane> pyr1{binomial_smooth(to_plane(prev))};
  std::vector<Plane> pyr2{binomial_smooth(to_plane(next))};
  while (static_cast<int>(pyr1.size()) < cfg.pyramid_levels) {
    const Plane& top = pyr1.back();
    if ((top.w + 1) / 2 < kMinPyramidSide || (top.h + 1) / 2 < kMinPyramidSide) break;
    pyr1.push_back(downsample(pyr1.back()));
    pyr2.push_back(downsample(pyr2.back()));
  }

  Plane u(pyr1.back().w, pyr1.back().h);
  Plane v(pyr1.back().w, pyr1.back().h);
  for (int level = static_cast<int>(pyr1.size()) - 1; level >= 0; --level) {
    const Plane& i1 = pyr1[level];
    if (u.w != i1.w || u.h != i1.h) {
      const double sx = double(i1.w) / u.w;
      const double sy = double(i1.h) / u.h;
      u = upsample_flow(u, i1.w, i1.h, sx);
      v = upsample_flow(v, i1.w, i1.h, sy);
    }
    refine_level(i1, pyr2[level], u, v, cfg);
  }

  FlowField flow(prev.width, prev.height);
  flow.u = std::move(u.d);
  flow.v = std::move(v.d);
  return flow;
}

FlowImage quantize_flow(const FlowField& flow, double bound) {
  require(bound > 0.0, "quantize_flow: bound must be > 0");
  auto to_byte = [](double value) {
    return static_cast<std::uint8_t>(std::clamp(round_half_up(value), 0.0, 255.0));
  };
  FlowImage img;
  img.width = flow.width;
  img.height = flow.height;
  const std::size_t n = flow.u.size();
  img.u.resize(n);
  img.v.resize(n);
  img.magnitude.resize(n);
  const double mag_scale = 255.0 / (bound * std::sqrt(2.0));
  for (std::size_t i = 0; i < n; ++i) {
    img.u[i] = to_byte(128.0 + 127.0 * flow.u[i] / bound);
    img.v[i] = to_byte(128.0 + 127.0 * flow.v[i] / bound);
    img.magnitude[i] = to_byte(mag_scale * std::hypot(flow.u[i], flow.v[i]));
  }
  return img;
}

std::vector<FlowField> flow_sequence(const VideoClip& clip, const FlowConfig& cfg, int threads) {
  validate_clip(clip);
  cfg.validate();
  std::vector<FlowField> flows(clip.frames.size() - 1);
  parallel_for(flows.size(), threads,
               [&](std::size_t t) { flows[t] = compute_flow(clip.frames[t], clip.frames[t + 1], cfg); });
  return flows;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  std::ostringstream buf;
  BinaryWriter out(buf);
  out.magic("OFL1");
  out.u32(static_cast<std::uint32_t>(flow.width));
  out.u32(static_cast<std::uint32_t>(flow.height));
  for (double x : flow.u) out.f32(static_cast<float>(x));
  for (double x : flow.v) out.f32(static_cast<float>(x));
  write_file_atomically(path, buf.str());
}

FlowField read_flow(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::io, "cannot open flow file: " + path.string());
  BinaryReader in(file, path.string());
  in.expect_magic("OFL1");
  const std::uint32_t w = in.u32();
  const std::uint32_t h = in.u32();
  if (w == 0 || h == 0 || std::uint64_t(w) * h > (1ull << 28)) fail(ErrorKind::format, path.string() + ": bad flow dimensions");
  FlowField flow(static_cast<int>(w), static_cast<int>(h));
  for (double& x : flow.u) x = in.f32();
  for (double& x : flow.v) x = in.f32();
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    if (!std::isfinite(flow.u[i]) || !std::isfinite(flow.v[i])) fail(ErrorKind::format, path.string() + ": non-finite flow value");
  }
  return flow;
}

}  // namespace tstdd

#include "tstdd/temporal_reps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tstdd/error.hpp"

namespace tstdd {

void OfsdiConfig::validate() const {
  require(alpha > 0.0 && alpha < 1.0, "ofsdi: alpha must lie in (0, 1), got " + std::to_string(alpha));
}

void MhiConfig::validate() const {
  require(tau >= 1, "mhi: tau must be >= 1");
  require(motion_threshold >= 1 && motion_threshold <= 254, "mhi: threshold must lie in [1, 254]");
}

namespace {

void require_same_size(const TemporalImage& a, const TemporalImage& b, const char* op) {
  if (a.width != b.width || a.height != b.height) {
    fail(ErrorKind::invalid_argument, std::string(op) + ": dimension mismatch (" + std::to_string(a.width) + "x" +
                                          std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                          std::to_string(b.height) + ")");
  }
}

}  // namespace

TemporalImage magnitude_plane(const FlowImage& image, int time_index) {
  TemporalImage out(image.width, image.height, time_index);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = image.magnitude[i];
  return out;
}

TemporalImage flow_difference(const TemporalImage& f_t, const TemporalImage& f_prev) {
  require_same_size(f_t, f_prev, "flow_difference");
  TemporalImage out(f_t.width, f_t.height, f_t.time_index);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = std::abs(f_t.values[i] - f_prev.values[i]);
  return out;
}

TemporalImage ofsdi_update(const TemporalImage& o_prev, const TemporalImage& d_t, double alpha) {
  require_same_size(o_prev, d_t, "ofsdi_update");
  require(alpha > 0.0 && alpha < 1.0, "ofsdi_update: alpha must lie in (0, 1)");
  TemporalImage out(o_prev.width, o_prev.height, o_prev.time_index + 1);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = alpha * o_prev.values[i] + d_t.values[i];
  return out;
}

std::vector<TemporalImage> ofsdi_sequence(std::span<const TemporalImage> flow_planes, const OfsdiConfig& cfg) {
  cfg.validate();
  require(flow_planes.size() >= 2, "ofsdi_sequence: need at least 2 flow planes");

  TemporalImage o(flow_planes[0].width, flow_planes[0].height, 0);
  if (cfg.init_mode == OfsdiInit::first_flow_image) o.values = flow_planes[0].values;

  std::vector<TemporalImage> out;
  out.reserve(flow_planes.size() - 1);
  for (std::size_t k = 1; k < flow_planes.size(); ++k) {
    o = ofsdi_update(o, flow_difference(flow_planes[k], flow_planes[k - 1]), cfg.alpha);
    out.push_back(o);
  }
  return out;
}

ByteImage temporal_to_bytes(const TemporalImage& image, int channels) {
  require(channels >= 1, "temporal_to_bytes: channels must be >= 1");
  ByteImage out(image.width, image.height, channels);
  if (image.values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(image.values.begin(), image.values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return out;
  auto first = out.plane(0);
  for (std::size_t i = 0; i < image.values.size(); ++i) {
    first[i] = static_cast<std::uint8_t>(std::clamp(round_half_up(255.0 * ((image.values[i] - lo) / range)), 0.0, 255.0));
  }
  for (int c = 1; c < channels; ++c) std::copy(first.begin(), first.end(), out.plane(c).begin());
  return out;
}

std::vector<TemporalImage> ofmhi_sequence(std::span<const FlowImage> flows, const MhiConfig& cfg) {
  cfg.validate();
  std::vector<TemporalImage> out;
  if (flows.empty()) return out;
  out.reserve(flows.size());
  TemporalImage h(flows[0].width, flows[0].height, 0);
  for (std::size_t t = 0; t < flows.size(); ++t) {
    const FlowImage& f = flows[t];
    require(f.width == h.width && f.height == h.height, "ofmhi_sequence: dimension mismatch");
    TemporalImage next(h.width, h.height, static_cast<int>(t) + 1);
    for (std::size_t i = 0; i < next.values.size(); ++i) {
      next.values[i] = f.magnitude[i] > cfg.motion_threshold ? double(cfg.tau) : std::max(0.0, h.values[i] - 1.0);
    }
    h = std::move(next);
    out.push_back(h);
  }
  return out;
}

std::vector<TemporalImage> ofmhi_sequence(std::span<const FlowField> flows, const MhiConfig& cfg,
                                          double quantization_bound) {
  std::vector<FlowImage> images;
  images.reserve(flows.size());
  for (const FlowField& f : flows) images.push_back(quantize_flow(f, quantization_bound));
  return ofmhi_sequence(images, cfg);
}

ByteImage stack_flows(std::span<const FlowImage> flow_images, const StackConfig& cfg, int t) {
  require(cfg.window >= 1, "stack_flows: window must be >= 1");
  if (t < 0 || std::size_t(t) + cfg.window > flow_images.size()) {
    fail(ErrorKind::invalid_argument, "stack_flows: window [" + std::to_string(t) + ", " +
                                          std::to_string(t + cfg.window - 1) + "] exceeds " +
                                          std::to_string(flow_images.size()) + " flow images");
  }
  const FlowImage& first = flow_images[t];
  ByteImage out(first.width, first.height, 2 * cfg.window);
  for (int k = 0; k < cfg.window; ++k) {
    const FlowImage& f = flow_images[t + k];
    require(f.width == first.width && f.height == first.height, "stack_flows: dimension mismatch");
    std::copy(f.u.begin(), f.u.end(), out.plane(2 * k).begin());
    std::copy(f.v.begin(), f.v.end(), out.plane(2 * k + 1).begin());
  }
  return out;
}

}  // namespace tstdd

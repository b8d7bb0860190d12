#pragma once

#include <span>
#include <vector>

#include "tstdd/image.hpp"
#include "tstdd/optical_flow.hpp"

namespace tstdd {

/// Single-channel real image tied to a time index (OFSDI, difference image, or MHI).
struct TemporalImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  int time_index = 0;

  TemporalImage() = default;
  TemporalImage(int w, int h, int t = 0) : width(w), height(h), values(std::size_t(w) * h, 0.0), time_index(t) {}
};

enum class OfsdiInit { first_flow_image, zeros };

struct OfsdiConfig {
  double alpha = 0.96;
  OfsdiInit init_mode = OfsdiInit::first_flow_image;

  void validate() const;
};

struct MhiConfig {
  int tau = 15;
  int motion_threshold = 10;

  void validate() const;
};

struct StackConfig {
  int window = 10;
};

// The scalar brightness plane F(x, y, t) of an OF image: its magnitude channel.
TemporalImage magnitude_plane(const FlowImage& image, int time_index);

/// |f_t - f_prev| per pixel; keeps f_t's time index.
TemporalImage flow_difference(const TemporalImage& f_t, const TemporalImage& f_prev);

/// alpha * o_prev + d_t per pixel; time index advances by one.
TemporalImage ofsdi_update(const TemporalImage& o_prev, const TemporalImage& d_t, double alpha);

/// Runs the OFSDI recursion over flow planes F_0 .. F_{n-1}.
/// O(0) is F_0 (or zeros); O(k) = alpha O(k-1) + |F_k - F_{k-1}| for k = 1 .. n-1.
/// Returns O(1) .. O(n-1), i.e. n - 1 images with time indices 1 .. n-1.
std::vector<TemporalImage> ofsdi_sequence(std::span<const TemporalImage> flow_planes, const OfsdiConfig& cfg = {});

/// Per-image min-max scaling to [0, 255] (round half-up); constant images map to zero.
ByteImage temporal_to_bytes(const TemporalImage& image, int channels = 1);

/// Network input form of an OFSDI image: min-max scaled, replicated into three channels.
inline ByteImage ofsdi_to_input(const TemporalImage& o) { return temporal_to_bytes(o, 3); }

/// Motion history on the magnitude channel: H(t) = tau where magnitude > threshold,
/// else max(0, H(t-1) - 1), with H(0) = 0. One image per flow, time indices 1 .. n.
std::vector<TemporalImage> ofmhi_sequence(std::span<const FlowImage> flows, const MhiConfig& cfg = {});
std::vector<TemporalImage> ofmhi_sequence(std::span<const FlowField> flows, const MhiConfig& cfg,
                                          double quantization_bound);

/// (u, v) planes of flow images t .. t + W - 1 as a 2W-channel image ordered u_t, v_t, u_{t+1}, ...
ByteImage stack_flows(std::span<const FlowImage> flow_images, const StackConfig& cfg, int t);

}  // namespace tstdd

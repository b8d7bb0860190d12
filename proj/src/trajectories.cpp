#include "tstdd/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "tstdd/error.hpp"

namespace tstdd {

void TrajectoryConfig::validate() const {
  require(stride >= 1, "trajectories: stride must be >= 1");
  require(length >= 2, "trajectories: length must be >= 2");
  require(static_threshold > 0.0 && erratic_threshold > 0.0, "trajectories: thresholds must be > 0");
  require(median_radius >= 0, "trajectories: median_radius must be >= 0");
}

namespace {

std::vector<double> median_filter(const std::vector<double>& in, int w, int h, int radius) {
  if (radius == 0) return in;
  std::vector<double> out(in.size());
  std::vector<double> window;
  window.reserve(std::size_t(2 * radius + 1) * (2 * radius + 1));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      window.clear();
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -radius; dx <= radius; ++dx) {
          const int xx = std::clamp(x + dx, 0, w - 1);
          window.push_back(in[std::size_t(yy) * w + xx]);
        }
      }
      // Odd window size, so the median is the middle order statistic.
      auto mid = window.begin() + window.size() / 2;
      std::nth_element(window.begin(), mid, window.end());
      out[std::size_t(y) * w + x] = *mid;
    }
  }
  return out;
}

double sample_bilinear(const std::vector<double>& plane, int w, int h, double x, double y) {
  const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, w - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  auto at = [&](int xx, int yy) { return plane[std::size_t(yy) * w + xx]; };
  if (fx == 0.0 && fy == 0.0) return at(x0, y0);
  return (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x1, y0)) + fy * ((1 - fx) * at(x0, y1) + fx * at(x1, y1));
}

bool inside(double x, double y, int w, int h) { return x >= 0.0 && y >= 0.0 && x < w && y < h; }

std::vector<double> step_lengths(const Trajectory& t) {
  std::vector<double> steps;
  steps.reserve(t.points.size());
  for (std::size_t p = 1; p < t.points.size(); ++p) {
    steps.push_back(std::hypot(t.points[p].x - t.points[p - 1].x, t.points[p].y - t.points[p - 1].y));
  }
  return steps;
}

// Advances one point through field `f`; false when it leaves the frame.
bool advance(TrajectoryPoint& pt, const FlowField& f) {
  const double du = sample_bilinear(f.u, f.width, f.height, pt.x, pt.y);
  const double dv = sample_bilinear(f.v, f.width, f.height, pt.x, pt.y);
  pt.x += du;
  pt.y += dv;
  pt.z += 1;
  return inside(pt.x, pt.y, f.width, f.height);
}

}  // namespace

SmoothedFlows smooth_flows(std::span<const FlowField> flows, const TrajectoryConfig& cfg) {
  cfg.validate();
  SmoothedFlows out;
  out.fields.reserve(flows.size());
  for (const FlowField& f : flows) {
    FlowField s(f.width, f.height);
    s.u = median_filter(f.u, f.width, f.height, cfg.median_radius);
    s.v = median_filter(f.v, f.width, f.height, cfg.median_radius);
    out.fields.push_back(std::move(s));
  }
  return out;
}

std::vector<TrajectoryPoint> sample_seed_points(int z, int width, int height, const TrajectoryConfig& cfg) {
  require(cfg.stride >= 1, "sample_seed_points: stride must be >= 1");
  std::vector<TrajectoryPoint> seeds;
  const int half = cfg.stride / 2;
  for (int j = 0; (j + 1) * cfg.stride <= height; ++j) {
    for (int i = 0; (i + 1) * cfg.stride <= width; ++i) {
      seeds.push_back({double(i * cfg.stride + half), double(j * cfg.stride + half), z});
    }
  }
  return seeds;
}

std::optional<Trajectory> track_point(const TrajectoryPoint& seed, const SmoothedFlows& flows,
                                      const TrajectoryConfig& cfg) {
  cfg.validate();
  if (flows.fields.empty()) return std::nullopt;
  const int w = flows.fields.front().width;
  const int h = flows.fields.front().height;
  require(inside(seed.x, seed.y, w, h), "track_point: seed outside the frame");
  if (seed.z < 0 || std::size_t(seed.z) + cfg.length - 1 > flows.fields.size()) return std::nullopt;

  Trajectory t;
  t.points.reserve(cfg.length);
  t.points.push_back(seed);
  TrajectoryPoint pt = seed;
  for (int p = 1; p < cfg.length; ++p) {
    if (!advance(pt, flows.fields[pt.z])) return std::nullopt;
    t.points.push_back(pt);
  }
  return t;
}

bool is_static(const Trajectory& t, const TrajectoryConfig& cfg) {
  if (t.points.size() < 2) return true;
  const double n = double(t.points.size());
  double mx = 0.0, my = 0.0;
  for (const TrajectoryPoint& p : t.points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double vx = 0.0, vy = 0.0;
  for (const TrajectoryPoint& p : t.points) {
    vx += (p.x - mx) * (p.x - mx);
    vy += (p.y - my) * (p.y - my);
  }
  return std::sqrt(vx / n) < cfg.static_threshold && std::sqrt(vy / n) < cfg.static_threshold;
}

bool is_erratic(const Trajectory& t, const TrajectoryConfig& cfg) {
  const std::vector<double> steps = step_lengths(t);
  return std::any_of(steps.begin(), steps.end(), [&](double s) { return s > cfg.erratic_threshold; });
}

std::vector<Trajectory> prune_trajectories(std::vector<Trajectory> raw, const TrajectoryConfig& cfg) {
  std::vector<Trajectory> kept;
  kept.reserve(raw.size());
  for (Trajectory& t : raw) {
    if (!is_static(t, cfg) && !is_erratic(t, cfg)) kept.push_back(std::move(t));
  }
  return kept;
}

std::vector<Trajectory> extract_trajectories(int width, int height, std::span<const FlowField> flows,
                                             const TrajectoryConfig& cfg) {
  cfg.validate();
  for (const FlowField& f : flows) {
    require(f.width == width && f.height == height, "extract_trajectories: flow size does not match the clip");
  }
  const SmoothedFlows smoothed = smooth_flows(flows, cfg);
  const int frames = static_cast<int>(flows.size()) + 1;
  const int last_seed_frame = frames - cfg.length;
  const double min_gap = cfg.stride / 2.0;

  std::vector<Trajectory> active;
  std::vector<Trajectory> complete;
  for (int z = 0; z < frames; ++z) {
    if (z <= last_seed_frame) {
      for (const TrajectoryPoint& seed : sample_seed_points(z, width, height, cfg)) {
        const bool covered = std::any_of(active.begin(), active.end(), [&](const Trajectory& t) {
          const TrajectoryPoint& p = t.points.back();
          return std::hypot(p.x - seed.x, p.y - seed.y) <= min_gap;
        });
        if (!covered) active.push_back(Trajectory{{seed}});
      }
    }
    if (z == frames - 1) break;
    std::vector<Trajectory> still_active;
    still_active.reserve(active.size());
    for (Trajectory& t : active) {
      TrajectoryPoint pt = t.points.back();
      if (!advance(pt, smoothed.fields[z])) continue;
      t.points.push_back(pt);
      if (static_cast<int>(t.points.size()) == cfg.length) {
        complete.push_back(std::move(t));
      } else {
        still_active.push_back(std::move(t));
      }
    }
    active = std::move(still_active);
  }
  return prune_trajectories(std::move(complete), cfg);
}

void write_trajectories(std::ostream& out, std::span<const Trajectory> trajectories) {
  char buf[64];
  for (const Trajectory& t : trajectories) {
    out << (t.points.empty() ? 0 : t.points.front().z);
    for (const TrajectoryPoint& p : t.points) {
      std::snprintf(buf, sizeof buf, " %.4f %.4f", p.x, p.y);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace tstdd

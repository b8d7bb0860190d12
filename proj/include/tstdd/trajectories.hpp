#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tstdd/optical_flow.hpp"

namespace tstdd {

struct TrajectoryPoint {
  double x = 0.0;
  double y = 0.0;
  int z = 0;

  bool operator==(const TrajectoryPoint&) const = default;
};

/// Exactly P points with consecutive frame indices, all inside the frame.
struct Trajectory {
  std::vector<TrajectoryPoint> points;

  bool operator==(const Trajectory&) const = default;
};

struct TrajectoryConfig {
  int stride = 5;
  int length = 15;                 // P
  double static_threshold = 0.4;   // min std of point positions along x or y, px
  double erratic_threshold = 10.0; // max single-step displacement, px
  int median_radius = 2;

  void validate() const;
};

/// Median-filtered flow fields, the only input `track_point` accepts.
struct SmoothedFlows {
  std::vector<FlowField> fields;
};

SmoothedFlows smooth_flows(std::span<const FlowField> flows, const TrajectoryConfig& cfg);

/// Grid seeds at (i*stride + stride/2, j*stride + stride/2) for every cell fully inside the frame.
std::vector<TrajectoryPoint> sample_seed_points(int z, int width, int height, const TrajectoryConfig& cfg);

/// Integrates the smoothed flow from `seed` for P - 1 steps with bilinear sampling.
/// Returns nullopt if a point leaves the frame or the flow runs out.
std::optional<Trajectory> track_point(const TrajectoryPoint& seed, const SmoothedFlows& flows,
                                      const TrajectoryConfig& cfg);

/// Drops static tracks (std of the point positions below the threshold along both x and y)
/// and erratic ones (any step longer than the erratic threshold). Survivor order is preserved.
std::vector<Trajectory> prune_trajectories(std::vector<Trajectory> raw, const TrajectoryConfig& cfg);

bool is_static(const Trajectory& t, const TrajectoryConfig& cfg);
bool is_erratic(const Trajectory& t, const TrajectoryConfig& cfg);

/// Sample, track and prune over a whole clip. `flows` holds the L - 1 pairwise fields.
/// New seeds are placed at every frame that can still hold a full-length track, on grid
/// points with no live track within stride/2; at frame 0 (and whenever a batch of tracks
/// completes) that is the whole grid.
std::vector<Trajectory> extract_trajectories(int width, int height, std::span<const FlowField> flows,
                                             const TrajectoryConfig& cfg = {});

/// One line per trajectory: "z0 x1 y1 ... xP yP" with four decimals.
void write_trajectories(std::ostream& out, std::span<const Trajectory> trajectories);

}  // namespace tstdd

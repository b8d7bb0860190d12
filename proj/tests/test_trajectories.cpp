#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "tstdd/trajectories.hpp"

using namespace tstdd;

namespace {

SmoothedFlows uniform_flows(int w, int h, int count, double u, double v) {
  SmoothedFlows s;
  for (int i = 0; i < count; ++i) {
    FlowField f(w, h);
    std::fill(f.u.begin(), f.u.end(), u);
    std::fill(f.v.begin(), f.v.end(), v);
    s.fields.push_back(f);
  }
  return s;
}

Trajectory line(double x0, double y0, double dx, double dy, int n) {
  Trajectory t;
  for (int i = 0; i < n; ++i) t.points.push_back({x0 + dx * i, y0 + dy * i, i});
  return t;
}

}  // namespace

TEST_CASE("default trajectory length") { CHECK(TrajectoryConfig{}.length == 15); }

TEST_CASE("seed grid counts whole cells") {
  TrajectoryConfig cfg;
  cfg.stride = 5;
  const auto seeds = sample_seed_points(3, 20, 20, cfg);
  CHECK(seeds.size() == 16);
  CHECK(seeds.front() == TrajectoryPoint{2, 2, 3});
  CHECK(seeds.back() == TrajectoryPoint{17, 17, 3});
  cfg.stride = 25;
  CHECK(sample_seed_points(0, 20, 20, cfg).empty());
}

TEST_CASE("constant flow integrates to a straight line") {
  TrajectoryConfig cfg;
  const SmoothedFlows flows = uniform_flows(32, 16, 14, 1.0, 0.0);
  const auto t = track_point({5, 5, 0}, flows, cfg);
  REQUIRE(t.has_value());
  REQUIRE(t->points.size() == 15);
  for (int p = 0; p < 15; ++p) {
    CHECK(t->points[p].x == 5 + p);
    CHECK(t->points[p].y == 5);
    CHECK(t->points[p].z == p);
  }
}

TEST_CASE("zero flow keeps every point on the seed and is pruned") {
  TrajectoryConfig cfg;
  const SmoothedFlows flows = uniform_flows(20, 20, 14, 0.0, 0.0);
  const auto t = track_point({7, 9, 0}, flows, cfg);
  REQUIRE(t.has_value());
  for (const TrajectoryPoint& p : t->points) {
    CHECK(p.x == 7);
    CHECK(p.y == 9);
  }
  CHECK(is_static(*t, cfg));
  CHECK(prune_trajectories({*t}, cfg).empty());
}

TEST_CASE("tracks leaving the frame are rejected") {
  TrajectoryConfig cfg;
  const SmoothedFlows flows = uniform_flows(20, 20, 14, 3.0, 0.0);
  CHECK_FALSE(track_point({17, 5, 0}, flows, cfg).has_value());
  const SmoothedFlows short_flows = uniform_flows(20, 20, 5, 0.1, 0.0);
  CHECK_FALSE(track_point({5, 5, 0}, short_flows, cfg).has_value());
  CHECK_THROWS_AS(track_point({25, 5, 0}, flows, cfg), Error);
}

TEST_CASE("moving constant-velocity tracks survive pruning") {
  TrajectoryConfig cfg;
  const Trajectory t = line(5, 5, 1.0, 0.0, 15);
  CHECK_FALSE(is_static(t, cfg));
  CHECK(prune_trajectories({t}, cfg).size() == 1);
  // Sub-threshold drift in both directions still counts as static.
  CHECK(is_static(line(5, 5, 0.05, 0.05, 15), cfg));
  CHECK_FALSE(is_static(line(5, 5, 0.0, 0.2, 15), cfg));
}

TEST_CASE("a single long jump marks a track as erratic") {
  TrajectoryConfig cfg;
  Trajectory t = line(5, 5, 1.0, 0.0, 15);
  for (int p = 8; p < 15; ++p) t.points[p].x += 15.0;
  CHECK(is_erratic(t, cfg));
  CHECK(prune_trajectories({t}, cfg).empty());
  CHECK_FALSE(is_erratic(line(0, 0, 7.0, 7.0, 15), cfg));
}

TEST_CASE("pruning preserves survivor order") {
  TrajectoryConfig cfg;
  std::vector<Trajectory> raw = {line(1, 1, 1, 0, 15), line(3, 3, 0, 0, 15), line(2, 2, 0, 1, 15),
                                 line(4, 4, 0.5, 0.5, 15)};
  const auto kept = prune_trajectories(raw, cfg);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0] == raw[0]);
  CHECK(kept[1] == raw[2]);
  CHECK(kept[2] == raw[3]);
}

TEST_CASE("a static clip yields no trajectories") {
  const VideoClip clip = [] {
    VideoClip c;
    Frame f(32, 32);
    for (std::size_t i = 0; i < f.pixels.size(); ++i) f.pixels[i] = std::uint8_t((i * 53) % 251);
    c.frames.assign(20, f);
    return c;
  }();
  const auto flows = flow_sequence(clip);
  CHECK(extract_trajectories(32, 32, flows).empty());
}

TEST_CASE("translate-right clips give rightward trajectories") {
  for (std::uint64_t seed : {0u, 7u}) {
    const VideoClip clip = synth_generate(MotionClass::translate_right, seed);
    const auto flows = flow_sequence(clip);
    const auto tracks = extract_trajectories(clip.width(), clip.height(), flows);
    CHECK(tracks.size() > 0);
    for (const Trajectory& t : tracks) {
      REQUIRE(t.points.size() == 15);
      const double mean_u = (t.points.back().x - t.points.front().x) / 14.0;
      CHECK(mean_u > 0.0);
      for (std::size_t p = 1; p < t.points.size(); ++p) CHECK(t.points[p].z == t.points[p - 1].z + 1);
      for (const TrajectoryPoint& p : t.points) {
        CHECK(p.x >= 0);
        CHECK(p.x < 64);
        CHECK(p.y >= 0);
        CHECK(p.y < 64);
      }
    }
  }
}

TEST_CASE("trajectory extraction is deterministic") {
  const VideoClip clip = synth_generate(MotionClass::expand, 4);
  const auto flows = flow_sequence(clip);
  CHECK(extract_trajectories(64, 64, flows) == extract_trajectories(64, 64, flows));
}

TEST_CASE("uniform flow over a clip tracks from many start frames") {
  TrajectoryConfig cfg;
  cfg.median_radius = 0;
  std::vector<FlowField> flows = uniform_flows(40, 20, 29, 0.5, 0.0).fields;
  const auto tracks = extract_trajectories(40, 20, flows, cfg);
  REQUIRE_FALSE(tracks.empty());
  int late_start = 0;
  for (const Trajectory& t : tracks) {
    CHECK(t.points.front().z <= 30 - 15);
    late_start += t.points.front().z > 0;
  }
  CHECK(late_start > 0);
}

TEST_CASE("trajectory text output") {
  std::ostringstream out;
  const std::vector<Trajectory> t = {line(1, 2, 0.5, 0, 2)};
  write_trajectories(out, t);
  CHECK(out.str() == "0 1.0000 2.0000 1.5000 2.0000\n");
}

TEST_CASE("invalid trajectory settings are rejected") {
  TrajectoryConfig cfg;
  cfg.static_threshold = 0.0;
  CHECK(test::error_kind_of([&] { cfg.validate(); }) == ErrorKind::invalid_argument);
  cfg = {};
  cfg.length = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "support.hpp"
#include "tstdd/pipeline.hpp"

using namespace tstdd;
namespace fs = std::filesystem;

namespace {

void make_dataset(const fs::path& root, int per_class, int length) {
  SynthSpec spec;
  spec.length = length;
  for (MotionClass c : kAllMotionClasses)
    for (int i = 0; i < per_class; ++i) {
      const VideoClip clip = synth_generate(c, 100 + i, spec);
      save_frame_sequence(clip, root / std::string(to_string(c)) / ("v" + std::to_string(i)));
    }
}

PipelineConfig small_config(const fs::path& cache) {
  PipelineConfig cfg;
  cfg.cache_dir = cache;
  cfg.codebook_size = 16;
  cfg.pca_dim = 32;
  cfg.train_per_class = 2;
  cfg.repeats = 2;
  cfg.seed = 3;
  cfg.threads = 1;
  return cfg;
}

std::map<std::string, std::string> parse_report(const std::string& text, bool drop_timing) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    const std::string key = line.substr(0, tab);
    if (drop_timing && key.find("timing.") != std::string::npos) continue;
    REQUIRE(kv.emplace(key, line.substr(tab + 1)).second);
  }
  return kv;
}

std::string report_text(const RunReport& r) {
  std::ostringstream out;
  write_report(out, r);
  return out.str();
}

// One shared small dataset: 4 classes x 4 videos of 20 frames.
struct Fixture {
  test::TempDir dir{"pipeline"};
  fs::path data = dir / "data";
  Fixture() { make_dataset(data, 4, 20); }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("dataset scanning") {
  const auto entries = scan_dataset(fixture().data);
  REQUIRE(entries.size() == 16);
  CHECK(entries.front().label == "expand");
  CHECK(entries.front().id() == "expand/v0");
  CHECK(entries.back().id() == "translate-right/v3");
  CHECK(std::is_sorted(entries.begin(), entries.end(),
                       [](const VideoEntry& a, const VideoEntry& b) { return a.id() < b.id(); }));
  test::TempDir empty("empty");
  CHECK(test::error_kind_of([&] { scan_dataset(empty.path()); }) == ErrorKind::io);
  CHECK(test::error_kind_of([&] { scan_dataset(empty / "nope"); }) == ErrorKind::io);
}

TEST_CASE("extraction caches one file per video and reuses it") {
  test::TempDir cache("cache");
  const PipelineConfig cfg = small_config(cache.path());
  const ExtractResult first = run_extract(fixture().data, cfg);
  CHECK(first.cache_files.size() == 16);
  CHECK(first.computed == 16);
  CHECK(first.cache_hits == 0);
  CHECK(std::distance(fs::directory_iterator(cache.path()), fs::directory_iterator()) == 16);

  const ExtractResult second = run_extract(fixture().data, cfg);
  CHECK(second.computed == 0);
  CHECK(second.cache_hits == 16);
  REQUIRE(second.videos.size() == first.videos.size());
  for (std::size_t i = 0; i < first.videos.size(); ++i) {
    CHECK(second.videos[i].id == first.videos[i].id);
    CHECK(second.videos[i].label == first.videos[i].label);
    CHECK(second.videos[i].trajectories == first.videos[i].trajectories);
    for (int s = 0; s < 3; ++s) CHECK(second.videos[i].streams[s] == first.videos[i].streams[s]);
  }

  PipelineConfig other = cfg;
  other.mhi.tau = 12;
  const ExtractResult third = run_extract(fixture().data, other);
  CHECK(third.computed == 16);
  // Model-only settings share the cache.
  PipelineConfig model_only = cfg;
  model_only.codebook_size = 8;
  CHECK(run_extract(fixture().data, model_only).cache_hits == 16);
}

TEST_CASE("single-video extraction has the expected shapes") {
  SynthSpec spec;
  spec.length = 20;
  const VideoClip clip = synth_generate(MotionClass::translate_left, 4, spec);
  PipelineConfig cfg;
  StageTimings t;
  const VideoDescriptors d = extract_video(clip, cfg, &t);
  CHECK(d.trajectories > 0);
  CHECK(d.stream(Stream::local_temporal).cols() == 256);
  CHECK(d.stream(Stream::spatial_temporal).cols() == 176);
  CHECK(d.stream(Stream::global_temporal).cols() == 176);
  for (const auto& m : d.streams) {
    CHECK(m.rows() == Eigen::Index(d.trajectories));
    CHECK(m.allFinite());
    CHECK(m.minCoeff() >= 0.0);
    CHECK(m == m.cast<float>().cast<double>());
  }
  CHECK(t.flow > 0.0);

  cfg.streams = {Stream::global_temporal};
  const VideoDescriptors g = extract_video(clip, cfg);
  CHECK(g.stream(Stream::local_temporal).cols() == 0);
  CHECK(g.stream(Stream::global_temporal) == d.stream(Stream::global_temporal));

  VideoClip short_clip = clip;
  short_clip.frames.resize(2);
  CHECK_THROWS_AS(extract_video(short_clip, PipelineConfig{}), Error);
}

TEST_CASE("cache files round-trip and reject corruption") {
  test::TempDir dir("tstd");
  VideoDescriptors d;
  d.id = "x/y";
  d.label = "x";
  d.trajectories = 3;
  d.streams[0] = test::random_matrix(3, 5).cast<float>().cast<double>();
  d.streams[1] = Eigen::MatrixXd(3, 0);
  d.streams[2] = test::random_matrix(3, 4).cast<float>().cast<double>();
  write_descriptor_cache(dir / "a.tstd", d);
  const VideoDescriptors back = read_descriptor_cache(dir / "a.tstd", d.id, d.label);
  CHECK(back.trajectories == 3);
  for (int s = 0; s < 3; ++s) CHECK(back.streams[s] == d.streams[s]);
  std::ofstream(dir / "a.tstd", std::ios::app) << "x";
  CHECK(test::error_kind_of([&] { read_descriptor_cache(dir / "a.tstd", d.id, d.label); }) == ErrorKind::format);
}

TEST_CASE("splits are per class, disjoint and seeded") {
  std::vector<VideoDescriptors> videos;
  for (const char* label : {"b", "a", "c"})
    for (int i = 0; i < 6; ++i) {
      VideoDescriptors v;
      v.label = label;
      v.id = std::string(label) + "/" + std::to_string(i);
      videos.push_back(v);
    }
  PipelineConfig cfg;
  cfg.train_per_class = 4;
  const Split s = split_videos(videos, cfg, 1);
  CHECK(s.train.size() == 12);
  CHECK(s.test.size() == 6);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  for (std::size_t i : s.test) CHECK(all.insert(i).second);
  CHECK(all.size() == 18);
  std::map<std::string, int> per_class;
  for (std::size_t i : s.train) ++per_class[videos[i].label];
  for (const auto& [label, n] : per_class) CHECK(n == 4);

  const Split again = split_videos(videos, cfg, 1);
  CHECK(again.train == s.train);
  bool differs = false;
  for (std::uint64_t seed = 2; seed < 8; ++seed) differs |= split_videos(videos, cfg, seed).train != s.train;
  CHECK(differs);

  cfg.train_fraction = 0.5;
  CHECK(split_videos(videos, cfg, 1).train.size() == 9);
  cfg.train_fraction = 0.0;
  cfg.train_per_class = 7;
  CHECK(test::error_kind_of([&] { split_videos(videos, cfg, 1); }) == ErrorKind::invalid_argument);
}

TEST_CASE("evaluation report schema and determinism") {
  test::TempDir cache("eval");
  const PipelineConfig cfg = small_config(cache.path());
  const RunReport r = run_evaluate(fixture().data, cfg);
  REQUIRE(r.repeats.size() == 2);
  CHECK(r.mean_accuracy == doctest::Approx((r.repeats[0].accuracy + r.repeats[1].accuracy) / 2).epsilon(1e-15));
  CHECK(r.repeats[0].split_seed == 3);
  CHECK(r.repeats[1].split_seed == 4);
  CHECK(r.labels.size() == 4);
  CHECK(r.tstdd_dim == 3 * 32);
  for (const RepeatResult& rep : r.repeats) {
    CHECK(rep.test_ids.size() == 8);
    CHECK(rep.confusion.sum() == 8);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(rep.confusion.row(i).sum() == 2);
  }
  CHECK(r.timings.count("extract.flow") == 1);
  CHECK(r.timings.count("fit.svm") == 1);

  const auto kv = parse_report(report_text(r), false);
  for (const char* key : {"streams", "videos", "tstdd_dim", "classes", "repeats", "mean_accuracy",
                          "repeat.0.accuracy", "repeat.1.confusion", "config.svm.c", "timing.fit.svm"})
    CHECK(kv.count(key) == 1);
  CHECK(kv.at("repeats") == "2");
  CHECK(kv.at("config.codebook.size") == "16");

  // Same inputs give the same report apart from wall-clock values.
  const RunReport again = run_evaluate(fixture().data, cfg);
  CHECK(parse_report(report_text(again), true) == parse_report(report_text(r), true));

  // A different seed changes the splits but not the schema.
  PipelineConfig reseeded = cfg;
  reseeded.seed = 50;
  const auto other = parse_report(report_text(run_evaluate(fixture().data, reseeded)), false);
  CHECK(other.size() == kv.size());
  for (const auto& [k, v] : kv) CHECK(other.count(k) == 1);
}

TEST_CASE("disabling a stream shrinks the descriptor") {
  test::TempDir cache("dim");
  PipelineConfig cfg = small_config(cache.path());
  cfg.repeats = 1;
  const ExtractResult ex = run_extract(fixture().data, cfg);
  CHECK(evaluate_descriptors(ex, cfg).tstdd_dim == 96);
  cfg.streams = {Stream::local_temporal, Stream::global_temporal};
  CHECK(evaluate_descriptors(ex, cfg).tstdd_dim == 64);
  cfg.streams = {Stream::spatial_temporal};
  CHECK(evaluate_descriptors(ex, cfg).tstdd_dim == 32);
}

TEST_CASE("ablation runs every subset on the same splits") {
  test::TempDir cache("ablate");
  PipelineConfig cfg = small_config(cache.path());
  const AblationReport a = run_ablation(fixture().data, cfg);
  REQUIRE(a.rows.size() == 5);
  const std::vector<std::string> names = {"lt", "st", "gt", "lt+st", "lt+st+gt"};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.rows[i].first == names[i]);
    CHECK(a.rows[i].second.streams == names[i]);
    for (std::size_t r = 0; r < 2; ++r) {
      CHECK(a.rows[i].second.repeats[r].split_seed == a.rows[0].second.repeats[r].split_seed);
      CHECK(a.rows[i].second.repeats[r].test_ids == a.rows[0].second.repeats[r].test_ids);
    }
  }
  std::ostringstream out;
  write_report(out, a);
  const auto kv = parse_report(out.str(), false);
  CHECK(kv.at("subset.lt+st.streams") == "lt+st");
  CHECK(kv.count("subset.gt.mean_accuracy") == 1);
}

TEST_CASE("saved models predict like in-memory models") {
  test::TempDir cache("model");
  PipelineConfig cfg = small_config(cache.path());
  const ExtractResult ex = run_extract(fixture().data, cfg);
  const TrainedModel model = fit_model(ex.videos, cfg, cfg.seed);
  save_model(cache / "m", model, cfg);
  PipelineConfig loaded_cfg;
  const TrainedModel loaded = load_model(cache / "m", &loaded_cfg);
  CHECK(format_kv(to_kv(loaded_cfg)) == format_kv(to_kv(cfg)));
  for (const VideoDescriptors& v : ex.videos) {
    const Prediction a = predict_video(model, v);
    const Prediction b = predict_video(loaded, v);
    CHECK(a.class_index == b.class_index);
    CHECK((a.scores - b.scores).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const TrainedModel stage = fit_codebook_stage(ex.videos, cfg, cfg.seed);
  save_model(cache / "cb", stage, cfg);
  CHECK_THROWS_AS(load_model(cache / "cb"), Error);
  CHECK_NOTHROW(load_model(cache / "cb", nullptr, false));
}

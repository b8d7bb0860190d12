#include "tstdd/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "tstdd/binary_io.hpp"
#include "tstdd/error.hpp"
#include "tstdd/featmaps.hpp"
#include "tstdd/optical_flow.hpp"
#include "tstdd/parallel.hpp"
#include "tstdd/rng.hpp"
#include "tstdd/temporal_reps.hpp"
#include "tstdd/trajectories.hpp"

namespace tstdd {

namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string format_fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string subset_name(std::span<const Stream> streams) {
  std::string out;
  for (Stream s : streams) {
    if (!out.empty()) out += "+";
    out += to_string(s);
  }
  return out;
}

Eigen::MatrixXd to_single_precision(const Eigen::MatrixXd& m) { return m.cast<float>().cast<double>(); }

}  // namespace

StageTimings& StageTimings::operator+=(const StageTimings& o) {
  load += o.load;
  flow += o.flow;
  temporal += o.temporal;
  featmaps += o.featmaps;
  trajectories += o.trajectories;
  pooling += o.pooling;
  return *this;
}

std::vector<VideoEntry> scan_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) fail(ErrorKind::io, "dataset directory does not exist: " + root.string());
  std::vector<VideoEntry> out;
  for (const auto& class_dir : fs::directory_iterator(root)) {
    if (!class_dir.is_directory()) continue;
    for (const auto& video_dir : fs::directory_iterator(class_dir.path())) {
      if (!video_dir.is_directory()) continue;
      out.push_back({class_dir.path().filename().string(), video_dir.path().filename().string(), video_dir.path()});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const VideoEntry& a, const VideoEntry& b) { return std::tie(a.label, a.name) < std::tie(b.label, b.name); });
  if (out.empty()) fail(ErrorKind::io, "no <class>/<video> directories under " + root.string());
  return out;
}

VideoDescriptors extract_video(const VideoClip& clip, const PipelineConfig& cfg, StageTimings* timings) {
  cfg.validate();
  validate_clip(clip);
  const int length = clip.length();
  require(length >= 3, "extract: clip '" + clip.id + "' needs at least 3 frames");
  const int n_flow = length - 1;
  if (cfg.has_stream(Stream::local_temporal) && n_flow < cfg.stack.window) {
    fail(ErrorKind::invalid_argument, "extract: clip '" + clip.id + "' has " + std::to_string(n_flow) +
                                          " flow fields, fewer than the stacking window " +
                                          std::to_string(cfg.stack.window));
  }
  StageTimings local;
  Stopwatch watch;

  const std::vector<FlowField> flows = flow_sequence(clip, cfg.flow);
  std::vector<FlowImage> images;
  images.reserve(flows.size());
  for (const FlowField& f : flows) images.push_back(quantize_flow(f, cfg.flow.quantization_bound));
  local.flow += watch.lap();

  const std::vector<Trajectory> trajectories = extract_trajectories(clip.width(), clip.height(), flows, cfg.trajectory);
  local.trajectories += watch.lap();

  VideoDescriptors out;
  out.id = clip.id;
  out.trajectories = trajectories.size();
  const auto k = static_cast<Eigen::Index>(trajectories.size());
  for (Stream s : kAllStreams) out.streams[static_cast<int>(s)].resize(k, 0);

  if (!trajectories.empty()) {
    for (Stream s : cfg.streams) {
      std::vector<ByteImage> inputs;
      inputs.reserve(length);
      if (s == Stream::local_temporal) {
        for (int z = 0; z < length; ++z) inputs.push_back(stack_flows(images, cfg.stack, std::min(z, n_flow - cfg.stack.window)));
      } else if (s == Stream::spatial_temporal) {
        const std::vector<TemporalImage> mhi = ofmhi_sequence(images, cfg.mhi);
        for (int z = 0; z < length; ++z) inputs.push_back(temporal_to_bytes(mhi[std::min(z, length - 2)], 3));
      } else {
        std::vector<TemporalImage> planes;
        planes.reserve(images.size());
        for (std::size_t i = 0; i < images.size(); ++i) planes.push_back(magnitude_plane(images[i], static_cast<int>(i)));
        const std::vector<TemporalImage> ofsdi = ofsdi_sequence(planes, cfg.ofsdi);
        for (int z = 0; z < length; ++z) inputs.push_back(ofsdi_to_input(ofsdi[std::clamp(z - 1, 0, length - 3)]));
      }
      local.temporal += watch.lap();

      std::vector<NormalizedLayer> layers;
      for (const FeatureMapStack& raw : filterbank_extract(inputs, cfg.filterbank, s)) layers.push_back(normalize_layer(raw));
      local.featmaps += watch.lap();

      out.streams[static_cast<int>(s)] = to_single_precision(pool_stream(trajectories, layers));
      local.pooling += watch.lap();
    }
  }
  if (timings) *timings += local;
  return out;
}

std::string descriptor_cache_key(const VideoClip& clip, const PipelineConfig& cfg) {
  Fnv1a h;
  h.update(format_kv(extraction_kv(cfg)));
  h.update("streams = " + format_stream_list(cfg.streams) + "\n");
  for (const Frame& f : clip.frames) {
    h.update(std::to_string(f.width) + "x" + std::to_string(f.height) + ";");
    h.update(f.pixels);
  }
  return hex64(h.digest());
}

void write_descriptor_cache(const fs::path& path, const VideoDescriptors& d) {
  std::ostringstream buf;
  for (const Eigen::MatrixXd& m : d.streams) write_descriptor_block(buf, m);
  write_file_atomically(path, buf.str());
}

VideoDescriptors read_descriptor_cache(const fs::path& path, const std::string& id, const std::string& label) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::io, "cannot open descriptor cache: " + path.string());
  VideoDescriptors d;
  d.id = id;
  d.label = label;
  for (Eigen::MatrixXd& m : d.streams) m = read_descriptor_block(file, path.string());
  d.trajectories = static_cast<std::size_t>(d.streams[0].rows());
  for (const Eigen::MatrixXd& m : d.streams) {
    if (static_cast<std::size_t>(m.rows()) != d.trajectories) {
      fail(ErrorKind::format, path.string() + ": stream blocks disagree on the trajectory count");
    }
  }
  BinaryReader tail(file, path.string());
  if (!tail.at_end()) fail(ErrorKind::format, path.string() + ": trailing data after descriptor blocks");
  return d;
}

ExtractResult run_extract(const fs::path& root, const PipelineConfig& cfg, std::ostream* log) {
  cfg.validate();
  const std::vector<VideoEntry> entries = scan_dataset(root);
  std::error_code ec;
  fs::create_directories(cfg.cache_dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create cache directory " + cfg.cache_dir.string() + ": " + ec.message());

  struct Slot {
    VideoDescriptors descriptors;
    fs::path cache_file;
    bool hit = false;
    StageTimings timings;
  };
  std::vector<Slot> slots(entries.size());
  parallel_for(entries.size(), cfg.threads, [&](std::size_t i) {
    const VideoEntry& e = entries[i];
    Slot& slot = slots[i];
    try {
      Stopwatch watch;
      VideoClip clip = load_frame_sequence(e.directory);
      clip.id = e.id();
      slot.timings.load += watch.lap();
      slot.cache_file = cfg.cache_dir / (e.label + "__" + e.name + "__" + descriptor_cache_key(clip, cfg) + ".tstd");
      if (fs::exists(slot.cache_file)) {
        slot.descriptors = read_descriptor_cache(slot.cache_file, e.id(), e.label);
        slot.hit = true;
      } else {
        slot.descriptors = extract_video(clip, cfg, &slot.timings);
        slot.descriptors.label = e.label;
        write_descriptor_cache(slot.cache_file, slot.descriptors);
      }
    } catch (const Error& err) {
      throw Error(err.kind(), "video " + e.id() + ": " + err.what());
    }
  });

  ExtractResult result;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    Slot& slot = slots[i];
    result.cache_files.push_back(slot.cache_file);
    result.timings += slot.timings;
    if (slot.hit) ++result.cache_hits;
    else ++result.computed;
    if (slot.descriptors.trajectories == 0) {
      result.excluded.push_back(entries[i].id());
      if (log) *log << "warning: video " << entries[i].id() << " yields no trajectories; excluded\n";
      continue;
    }
    result.videos.push_back(std::move(slot.descriptors));
  }
  return result;
}

Split split_videos(std::span<const VideoDescriptors> videos, const PipelineConfig& cfg, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < videos.size(); ++i) by_class[videos[i].label].push_back(i);
  Rng rng(seed);
  Split split;
  for (auto& [label, indices] : by_class) {
    const std::size_t count = indices.size();
    std::size_t n_train = static_cast<std::size_t>(cfg.train_per_class);
    if (cfg.train_fraction > 0.0) {
      n_train = std::max<std::size_t>(1, static_cast<std::size_t>(round_half_up(cfg.train_fraction * double(count))));
    }
    if (count < n_train) {
      fail(ErrorKind::invalid_argument, "split: class '" + label + "' has " + std::to_string(count) +
                                            " usable videos, fewer than the train count " + std::to_string(n_train));
    }
    rng.shuffle(std::span<std::size_t>(indices));
    split.train.insert(split.train.end(), indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), indices.begin() + static_cast<std::ptrdiff_t>(n_train), indices.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Eigen::Index TrainedModel::tstdd_dim() const {
  Eigen::Index d = 0;
  for (const PcaModel& p : pca) d += p.output_dim();
  return d;
}

Eigen::MatrixXd tstdd_rows(const VideoDescriptors& video, std::span<const Stream> streams, std::span<const PcaModel> pca) {
  require(streams.size() == pca.size(), "tstdd_rows: one PCA model per stream is required");
  std::vector<Eigen::MatrixXd> parts;
  Eigen::Index dim = 0;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const Eigen::MatrixXd& raw = video.stream(streams[i]);
    if (raw.cols() != pca[i].input_dim()) {
      fail(ErrorKind::invalid_argument, "video " + video.id + ": stream " + std::string(to_string(streams[i])) +
                                            " has descriptor length " + std::to_string(raw.cols()) + ", model expects " +
                                            std::to_string(pca[i].input_dim()));
    }
    parts.push_back(pca[i].project_rows(raw));
    dim += parts.back().cols();
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(video.trajectories), dim);
  Eigen::Index offset = 0;
  for (const Eigen::MatrixXd& p : parts) {
    out.middleCols(offset, p.cols()) = p;
    offset += p.cols();
  }
  return out;
}

Eigen::VectorXd encode_video(const Eigen::MatrixXd& tstdd, const Codebook& codebook, const LlcConfig& llc) {
  std::vector<SparseCode> codes;
  codes.reserve(static_cast<std::size_t>(tstdd.rows()));
  for (Eigen::Index i = 0; i < tstdd.rows(); ++i) codes.push_back(llc_encode(tstdd.row(i).transpose(), codebook, llc));
  return pool_codes(codes, codebook.size(), llc.pooling);
}

static void add_timings(FitTimings* total, const FitTimings& part) {
  if (!total) return;
  total->pca += part.pca;
  total->codebook += part.codebook;
  total->encode += part.encode;
  total->whiten += part.whiten;
  total->svm += part.svm;
}

TrainedModel fit_codebook_stage(std::span<const VideoDescriptors> train, const PipelineConfig& cfg, std::uint64_t seed,
                                FitTimings* timings) {
  cfg.validate();
  require(!train.empty(), "fit_model: no training videos");
  FitTimings local;
  Stopwatch watch;
  TrainedModel model;
  model.streams = cfg.streams;
  model.llc = cfg.llc;

  Eigen::Index common = cfg.pca_dim;
  for (Stream s : model.streams) {
    Eigen::Index rows = 0;
    const Eigen::Index d = train[0].stream(s).cols();
    if (d == 0) fail(ErrorKind::invalid_argument, "fit_model: stream " + std::string(to_string(s)) + " was not extracted");
    for (const VideoDescriptors& v : train) rows += v.stream(s).rows();
    Eigen::MatrixXd stacked(rows, d);
    Eigen::Index r = 0;
    for (const VideoDescriptors& v : train) {
      require(v.stream(s).cols() == d, "fit_model: descriptor lengths differ between videos");
      stacked.middleRows(r, v.stream(s).rows()) = v.stream(s);
      r += v.stream(s).rows();
    }
    model.pca.push_back(fit_pca(stacked, cfg.pca_dim));
    common = std::min(common, model.pca.back().output_dim());
  }
  for (PcaModel& p : model.pca) p = truncate_pca(p, common);
  local.pca += watch.lap();

  std::vector<Eigen::MatrixXd> rows;
  rows.reserve(train.size());
  for (const VideoDescriptors& v : train) rows.push_back(tstdd_rows(v, model.streams, model.pca));
  const std::uint64_t codebook_seed = seed * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull;
  model.codebook = build_codebook(rows, cfg.codebook_size, cfg.llc, codebook_seed, cfg.kmeans);
  model.codebook.centers = to_single_precision(model.codebook.centers);
  local.codebook += watch.lap();
  add_timings(timings, local);
  return model;
}

void fit_classifier_stage(TrainedModel& model, std::span<const VideoDescriptors> train, const PipelineConfig& cfg,
                          FitTimings* timings) {
  require(!train.empty(), "fit_model: no training videos");
  FitTimings local;
  Stopwatch watch;
  std::vector<Eigen::MatrixXd> rows;
  rows.reserve(train.size());
  for (const VideoDescriptors& v : train) rows.push_back(tstdd_rows(v, model.streams, model.pca));
  local.pca += watch.lap();

  Eigen::MatrixXd encodings(static_cast<Eigen::Index>(train.size()), model.codebook.size());
  std::vector<Eigen::VectorXd> slots(train.size());
  parallel_for(train.size(), cfg.threads, [&](std::size_t i) { slots[i] = encode_video(rows[i], model.codebook, model.llc); });
  for (std::size_t i = 0; i < train.size(); ++i) encodings.row(static_cast<Eigen::Index>(i)) = slots[i].transpose();
  local.encode += watch.lap();

  model.whiten = fit_whitening(encodings, cfg.whiten_retain);
  const Eigen::MatrixXd features = model.whiten.transform_rows(encodings);
  local.whiten += watch.lap();

  std::vector<std::string> labels;
  for (const VideoDescriptors& v : train) labels.push_back(v.label);
  model.svm = train_svm(features, labels, cfg.svm, cfg.threads);
  local.svm += watch.lap();
  add_timings(timings, local);
}

TrainedModel fit_model(std::span<const VideoDescriptors> train, const PipelineConfig& cfg, std::uint64_t seed,
                       FitTimings* timings) {
  TrainedModel model = fit_codebook_stage(train, cfg, seed, timings);
  fit_classifier_stage(model, train, cfg, timings);
  return model;
}

Eigen::VectorXd model_features(const TrainedModel& model, const VideoDescriptors& video) {
  if (video.trajectories == 0) fail(ErrorKind::invalid_argument, "video " + video.id + " has no trajectories");
  return model.whiten.transform(encode_video(tstdd_rows(video, model.streams, model.pca), model.codebook, model.llc));
}

Prediction predict_video(const TrainedModel& model, const VideoDescriptors& video) {
  return predict(model.svm, model_features(model, video));
}

void save_model(const fs::path& dir, const TrainedModel& model, const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create model directory " + dir.string() + ": " + ec.message());
  PipelineConfig snapshot = cfg;
  snapshot.streams = model.streams;
  snapshot.llc = model.llc;
  write_file_atomically(dir / "config.txt", format_kv(to_kv(snapshot)));
  for (std::size_t i = 0; i < model.streams.size(); ++i) {
    save_pca(dir / ("pca_" + std::string(to_string(model.streams[i])) + ".pcam"), model.pca[i]);
  }
  save_codebook(dir / "codebook.cdbk", model.codebook);
  if (model.svm.num_classes() > 0) {
    save_whitening(dir / "whiten.whtn", model.whiten);
    save_svm(dir / "svm.lsvm", model.svm);
  }
}

TrainedModel load_model(const fs::path& dir, PipelineConfig* cfg, bool require_classifier) {
  const PipelineConfig loaded = load_config(dir / "config.txt");
  TrainedModel model;
  model.streams = loaded.streams;
  model.llc = loaded.llc;
  for (Stream s : model.streams) model.pca.push_back(load_pca(dir / ("pca_" + std::string(to_string(s)) + ".pcam")));
  model.codebook = load_codebook(dir / "codebook.cdbk");
  for (const PcaModel& p : model.pca) {
    if (p.output_dim() != model.pca[0].output_dim()) fail(ErrorKind::format, dir.string() + ": PCA output dimensions differ");
  }
  if (model.codebook.dim() != model.tstdd_dim()) {
    fail(ErrorKind::format, dir.string() + ": codebook dimension does not match the PCA output");
  }
  if (require_classifier) {
    model.whiten = load_whitening(dir / "whiten.whtn");
    model.svm = load_svm(dir / "svm.lsvm");
    if (model.whiten.input_dim() != model.codebook.size() || model.svm.dim() != model.whiten.output_dim()) {
      fail(ErrorKind::format, dir.string() + ": model components have inconsistent dimensions");
    }
  }
  if (cfg) *cfg = loaded;
  return model;
}

RunReport evaluate_descriptors(const ExtractResult& extracted, const PipelineConfig& cfg) {
  cfg.validate();
  RunReport report;
  report.streams = subset_name(cfg.streams);
  report.videos = extracted.videos.size();
  report.excluded = extracted.excluded;
  report.config = to_kv(cfg);
  const std::span<const VideoDescriptors> videos = extracted.videos;
  if (videos.empty()) fail(ErrorKind::invalid_argument, "evaluate: no usable videos");

  FitTimings fit;
  double test_seconds = 0.0;
  for (int r = 0; r < cfg.repeats; ++r) {
    RepeatResult rep;
    rep.split_seed = cfg.seed + static_cast<std::uint64_t>(r);
    const Split split = split_videos(videos, cfg, rep.split_seed);
    if (split.test.empty()) fail(ErrorKind::invalid_argument, "evaluate: the split leaves no test videos");

    std::set<std::string> train_ids;
    std::vector<VideoDescriptors> train;
    for (std::size_t i : split.train) {
      train_ids.insert(videos[i].id);
      train.push_back(videos[i]);
    }
    for (std::size_t i : split.test) {
      if (train_ids.contains(videos[i].id)) fail(ErrorKind::numeric, "evaluate: video " + videos[i].id + " is in both splits");
    }

    const TrainedModel model = fit_model(train, cfg, rep.split_seed, &fit);
    Stopwatch watch;
    Eigen::MatrixXd features(static_cast<Eigen::Index>(split.test.size()), model.svm.dim());
    std::vector<Eigen::VectorXd> slots(split.test.size());
    parallel_for(split.test.size(), cfg.threads, [&](std::size_t i) { slots[i] = model_features(model, videos[split.test[i]]); });
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      features.row(static_cast<Eigen::Index>(i)) = slots[i].transpose();
      labels.push_back(videos[split.test[i]].label);
      rep.test_ids.push_back(videos[split.test[i]].id);
    }
    const Evaluation ev = evaluate(model.svm, features, labels);
    test_seconds += watch.lap();

    if (report.labels.empty()) {
      report.labels = model.svm.labels;
      report.tstdd_dim = model.tstdd_dim();
    }
    rep.accuracy = ev.accuracy;
    rep.confusion = ev.confusion;
    rep.per_class_accuracy = ev.per_class_accuracy;
    report.repeats.push_back(std::move(rep));
  }

  double sum = 0.0;
  for (const RepeatResult& rep : report.repeats) sum += rep.accuracy;
  report.mean_accuracy = sum / double(report.repeats.size());
  report.mean_per_class_accuracy.assign(report.labels.size(), 0.0);
  for (const RepeatResult& rep : report.repeats)
    for (std::size_t k = 0; k < rep.per_class_accuracy.size() && k < report.labels.size(); ++k)
      report.mean_per_class_accuracy[k] += rep.per_class_accuracy[k] / double(report.repeats.size());

  const StageTimings& t = extracted.timings;
  report.timings = {{"extract.load", t.load},       {"extract.flow", t.flow},
                    {"extract.temporal", t.temporal}, {"extract.featmaps", t.featmaps},
                    {"extract.trajectories", t.trajectories}, {"extract.pooling", t.pooling},
                    {"fit.pca", fit.pca},             {"fit.codebook", fit.codebook},
                    {"fit.encode", fit.encode},       {"fit.whiten", fit.whiten},
                    {"fit.svm", fit.svm},             {"test", test_seconds}};
  return report;
}

RunReport run_evaluate(const fs::path& root, const PipelineConfig& cfg, std::ostream* log) {
  const ExtractResult extracted = run_extract(root, cfg, log);
  return evaluate_descriptors(extracted, cfg);
}

AblationReport run_ablation(const fs::path& root, const PipelineConfig& cfg, std::ostream* log) {
  PipelineConfig all = cfg;
  all.streams.assign(kAllStreams.begin(), kAllStreams.end());
  const ExtractResult extracted = run_extract(root, all, log);
  AblationReport report;
  for (const std::vector<Stream>& subset : ablation_subsets()) {
    PipelineConfig c = cfg;
    c.streams = subset;
    report.rows.emplace_back(subset_name(subset), evaluate_descriptors(extracted, c));
  }
  return report;
}

void write_report(std::ostream& out, const RunReport& report, const std::string& prefix) {
  auto line = [&](const std::string& key, const std::string& value) { out << prefix << key << '\t' << value << '\n'; };
  line("streams", report.streams);
  line("videos", std::to_string(report.videos));
  line("excluded", std::to_string(report.excluded.size()));
  for (std::size_t i = 0; i < report.excluded.size(); ++i) line("excluded." + std::to_string(i), report.excluded[i]);
  line("tstdd_dim", std::to_string(report.tstdd_dim));
  line("classes", std::to_string(report.labels.size()));
  for (std::size_t k = 0; k < report.labels.size(); ++k) line("class." + std::to_string(k), report.labels[k]);
  line("repeats", std::to_string(report.repeats.size()));
  for (std::size_t r = 0; r < report.repeats.size(); ++r) {
    const RepeatResult& rep = report.repeats[r];
    const std::string key = "repeat." + std::to_string(r) + ".";
    line(key + "seed", std::to_string(rep.split_seed));
    line(key + "accuracy", format_fixed(rep.accuracy));
    std::string confusion;
    for (Eigen::Index i = 0; i < rep.confusion.rows(); ++i) {
      if (i > 0) confusion += ";";
      for (Eigen::Index j = 0; j < rep.confusion.cols(); ++j) confusion += (j > 0 ? " " : "") + std::to_string(rep.confusion(i, j));
    }
    line(key + "confusion", confusion);
    for (std::size_t k = 0; k < rep.per_class_accuracy.size(); ++k)
      line(key + "class_accuracy." + report.labels[k], format_fixed(rep.per_class_accuracy[k]));
  }
  line("mean_accuracy", format_fixed(report.mean_accuracy));
  for (std::size_t k = 0; k < report.mean_per_class_accuracy.size(); ++k)
    line("mean_class_accuracy." + report.labels[k], format_fixed(report.mean_per_class_accuracy[k]));
  for (const auto& [k, v] : report.config) line("config." + k, v);
  for (const auto& [k, v] : report.timings) line("timing." + k, format_fixed(v, 3));
}

void write_report(std::ostream& out, const AblationReport& report) {
  for (const auto& [name, row] : report.rows) write_report(out, row, "subset." + name + ".");
}

void print_report_table(std::ostream& out, const RunReport& report) {
  out << "streams " << report.streams << ", " << report.videos << " videos, Dim " << report.tstdd_dim << "\n";
  out << std::left << std::setw(10) << "repeat" << std::setw(12) << "seed" << "accuracy\n";
  for (std::size_t r = 0; r < report.repeats.size(); ++r) {
    out << std::setw(10) << r << std::setw(12) << report.repeats[r].split_seed
        << format_fixed(100.0 * report.repeats[r].accuracy, 2) << "%\n";
  }
  out << std::setw(22) << "mean" << format_fixed(100.0 * report.mean_accuracy, 2) << "%\n";
  for (std::size_t k = 0; k < report.labels.size(); ++k) {
    out << "  " << std::setw(20) << report.labels[k] << format_fixed(100.0 * report.mean_per_class_accuracy[k], 2) << "%\n";
  }
  out << std::right;
}

void print_report_table(std::ostream& out, const AblationReport& report) {
  out << std::left << std::setw(12) << "streams";
  const std::size_t repeats = report.rows.empty() ? 0 : report.rows[0].second.repeats.size();
  for (std::size_t r = 0; r < repeats; ++r) out << std::setw(9) << ("r" + std::to_string(r));
  out << "mean\n";
  for (const auto& [name, row] : report.rows) {
    out << std::setw(12) << name;
    for (const RepeatResult& rep : row.repeats) out << std::setw(9) << format_fixed(100.0 * rep.accuracy, 2);
    out << format_fixed(100.0 * row.mean_accuracy, 2) << "\n";
  }
  out << std::right;
}

}  // namespace tstdd

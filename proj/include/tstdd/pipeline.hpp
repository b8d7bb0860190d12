#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tstdd/classifier.hpp"
#include "tstdd/config.hpp"
#include "tstdd/descriptors.hpp"
#include "tstdd/encoding.hpp"
#include "tstdd/video_io.hpp"

namespace tstdd {

/// One video directory `<root>/<label>/<name>/`.
struct VideoEntry {
  std::string label;
  std::string name;
  std::filesystem::path directory;

  std::string id() const { return label + "/" + name; }
};

/// Lists `<root>/<class>/<video>/` directories, sorted by class then video name.
std::vector<VideoEntry> scan_dataset(const std::filesystem::path& root);

/// Wall-clock seconds per extraction stage, summed over videos.
struct StageTimings {
  double load = 0.0;
  double flow = 0.0;
  double temporal = 0.0;
  double featmaps = 0.0;
  double trajectories = 0.0;
  double pooling = 0.0;

  StageTimings& operator+=(const StageTimings& o);
};

/// Per-stream TDD matrices of one video (K x D each, K trajectories). Disabled streams have K rows and no columns.
/// Values are held at single precision so cached and freshly computed descriptors agree.
struct VideoDescriptors {
  std::string id;
  std::string label;
  std::size_t trajectories = 0;
  std::array<Eigen::MatrixXd, 3> streams;

  const Eigen::MatrixXd& stream(Stream s) const { return streams[static_cast<int>(s)]; }
};

/// Runs flow, temporal templates, feature maps, trajectories and pooling for one clip.
VideoDescriptors extract_video(const VideoClip& clip, const PipelineConfig& cfg, StageTimings* timings = nullptr);

/// Cache key: FNV-1a over the extraction settings, enabled streams and all frame bytes.
std::string descriptor_cache_key(const VideoClip& clip, const PipelineConfig& cfg);

void write_descriptor_cache(const std::filesystem::path& path, const VideoDescriptors& d);
VideoDescriptors read_descriptor_cache(const std::filesystem::path& path, const std::string& id, const std::string& label);

struct ExtractResult {
  std::vector<VideoDescriptors> videos;  // usable videos, dataset order
  std::vector<std::string> excluded;     // videos with no trajectories
  std::vector<std::filesystem::path> cache_files;
  std::size_t cache_hits = 0;
  std::size_t computed = 0;
  StageTimings timings;
};

/// Extracts every video of the dataset, reusing cache files whose key matches. Warnings go to `log`.
ExtractResult run_extract(const std::filesystem::path& root, const PipelineConfig& cfg, std::ostream* log = nullptr);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per class (sorted label order) shuffles that class's videos with one generator seeded by
/// `seed` and takes the first train_per_class (or round(train_fraction * count)) for training.
Split split_videos(std::span<const VideoDescriptors> videos, const PipelineConfig& cfg, std::uint64_t seed);

struct TrainedModel {
  std::vector<Stream> streams;
  std::vector<PcaModel> pca;  // one per enabled stream, same order
  Codebook codebook;
  LlcConfig llc;
  WhitenModel whiten;
  SvmModel svm;

  Eigen::Index tstdd_dim() const;
};

struct FitTimings {
  double pca = 0.0;
  double codebook = 0.0;
  double encode = 0.0;
  double whiten = 0.0;
  double svm = 0.0;
};

/// Concatenated PCA-reduced stream descriptors (K x Dim).
Eigen::MatrixXd tstdd_rows(const VideoDescriptors& video, std::span<const Stream> streams, std::span<const PcaModel> pca);

/// LLC-codes every trajectory of the video and pools into a K_c vector.
Eigen::VectorXd encode_video(const Eigen::MatrixXd& tstdd, const Codebook& codebook, const LlcConfig& llc);

/// PCA per stream (common output dimension) and the codebook. Codebook centers are rounded
/// to single precision, as stored on disk.
TrainedModel fit_codebook_stage(std::span<const VideoDescriptors> train, const PipelineConfig& cfg, std::uint64_t seed,
                                FitTimings* timings = nullptr);

/// Encodings, whitening and SVM on top of a model that already has PCA and a codebook.
void fit_classifier_stage(TrainedModel& model, std::span<const VideoDescriptors> train, const PipelineConfig& cfg,
                          FitTimings* timings = nullptr);

/// Both stages, from the training videos only.
TrainedModel fit_model(std::span<const VideoDescriptors> train, const PipelineConfig& cfg, std::uint64_t seed,
                       FitTimings* timings = nullptr);

/// The whitened encoding the classifier sees.
Eigen::VectorXd model_features(const TrainedModel& model, const VideoDescriptors& video);

Prediction predict_video(const TrainedModel& model, const VideoDescriptors& video);

// Writes config.txt, PCA and codebook always; whitening and SVM when fitted.
void save_model(const std::filesystem::path& dir, const TrainedModel& model, const PipelineConfig& cfg);
TrainedModel load_model(const std::filesystem::path& dir, PipelineConfig* cfg = nullptr, bool require_classifier = true);

struct RepeatResult {
  std::uint64_t split_seed = 0;
  double accuracy = 0.0;
  Eigen::MatrixXi confusion;
  std::vector<double> per_class_accuracy;
  std::vector<std::string> test_ids;
};

struct RunReport {
  std::string streams;
  std::vector<std::string> labels;
  std::vector<RepeatResult> repeats;
  double mean_accuracy = 0.0;
  std::vector<double> mean_per_class_accuracy;
  Eigen::Index tstdd_dim = 0;
  std::size_t videos = 0;
  std::vector<std::string> excluded;
  std::map<std::string, double> timings;  // seconds per stage
  KeyValues config;
};

/// The repeated-split protocol over already extracted descriptors.
RunReport evaluate_descriptors(const ExtractResult& extracted, const PipelineConfig& cfg);

RunReport run_evaluate(const std::filesystem::path& root, const PipelineConfig& cfg, std::ostream* log = nullptr);

struct AblationReport {
  std::vector<std::pair<std::string, RunReport>> rows;  // keyed by stream subset
};

inline const std::vector<std::vector<Stream>>& ablation_subsets() {
  static const std::vector<std::vector<Stream>> subsets = {
      {Stream::local_temporal},
      {Stream::spatial_temporal},
      {Stream::global_temporal},
      {Stream::local_temporal, Stream::spatial_temporal},
      {Stream::local_temporal, Stream::spatial_temporal, Stream::global_temporal},
  };
  return subsets;
}

/// Extracts all three streams once, then evaluates every subset on the same splits.
AblationReport run_ablation(const std::filesystem::path& root, const PipelineConfig& cfg, std::ostream* log = nullptr);

/// `key<TAB>value` lines. Keys starting with "timing." carry wall-clock values.
void write_report(std::ostream& out, const RunReport& report, const std::string& prefix = "");
void write_report(std::ostream& out, const AblationReport& report);
void print_report_table(std::ostream& out, const RunReport& report);
void print_report_table(std::ostream& out, const AblationReport& report);

}  // namespace tstdd

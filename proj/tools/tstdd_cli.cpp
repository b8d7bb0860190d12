#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tstdd/binary_io.hpp"
#include "tstdd/config.hpp"
#include "tstdd/error.hpp"
#include "tstdd/pipeline.hpp"
#include "tstdd/video_io.hpp"

namespace fs = std::filesystem;
using namespace tstdd;

namespace {

struct Overrides {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string streams;
  std::optional<int> codebook_size;
  std::optional<double> svm_c;
  std::optional<int> threads;
  std::string cache_dir;
  std::vector<std::string> settings;  // key=value
};

PipelineConfig resolve_config(const Overrides& o) {
  PipelineConfig cfg = o.config_file.empty() ? PipelineConfig{} : load_config(o.config_file);
  for (const std::string& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorKind::invalid_argument, "--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (!o.streams.empty()) cfg.streams = parse_stream_list(o.streams);
  if (o.codebook_size) cfg.codebook_size = *o.codebook_size;
  if (o.svm_c) cfg.svm.c = *o.svm_c;
  if (o.threads) cfg.threads = *o.threads;
  if (!o.cache_dir.empty()) cfg.cache_dir = o.cache_dir;
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomically(path, text);
  }
}

std::vector<VideoDescriptors> all_videos(const fs::path& data, const PipelineConfig& cfg) {
  ExtractResult r = run_extract(data, cfg, &std::cerr);
  std::cerr << r.computed << " extracted, " << r.cache_hits << " from cache, " << r.excluded.size() << " excluded\n";
  return std::move(r.videos);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-stream trajectory-pooled descriptors for action recognition"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config_file, "Flat key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--streams", o.streams, "Comma-separated subset of lt,st,gt");
  app.add_option("--codebook-size", o.codebook_size, "Codebook size K_c");
  app.add_option("--svm-c", o.svm_c, "SVM regularization C");
  app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  app.add_option("--cache-dir", o.cache_dir, "Descriptor cache directory");
  app.add_option("--set", o.settings, "Override any config key: key=value (repeatable)");

  std::string data, out, model_dir, report_path, codebook_dir;
  std::vector<std::string> videos;
  int per_class = 20;
  SynthSpec spec;

  auto* synth = app.add_subcommand("synth-gen", "Write a synthetic motion dataset as PGM frames");
  synth->add_option("--out", out, "Dataset root")->required();
  synth->add_option("--videos-per-class", per_class, "Videos per motion class")->check(CLI::PositiveNumber);
  synth->add_option("--width", spec.width)->check(CLI::Range(kMinFrameSide, 4096));
  synth->add_option("--height", spec.height)->check(CLI::Range(kMinFrameSide, 4096));
  synth->add_option("--length", spec.length)->check(CLI::Range(2, 100000));

  auto* extract = app.add_subcommand("extract", "Extract and cache per-stream descriptors for every video");
  extract->add_option("--data", data, "Dataset root (<class>/<video>/frame_*.pgm)")->required();

  auto* codebook = app.add_subcommand("build-codebook", "Fit per-stream PCA and the codebook on a dataset");
  codebook->add_option("--data", data, "Training dataset root")->required();
  codebook->add_option("--out", out, "Output model directory")->required();

  auto* train = app.add_subcommand("train", "Fit the full model on a dataset");
  train->add_option("--data", data, "Training dataset root")->required();
  train->add_option("--out", out, "Output model directory")->required();
  train->add_option("--codebook-dir", codebook_dir, "Reuse PCA and codebook from build-codebook");

  auto* pred = app.add_subcommand("predict", "Classify videos with a trained model");
  pred->add_option("--model", model_dir, "Model directory")->required();
  pred->add_option("videos", videos, "Video frame directories")->required();

  auto* eval = app.add_subcommand("evaluate", "Repeated random-split evaluation");
  eval->add_option("--data", data, "Dataset root")->required();
  eval->add_option("--report", report_path, "Machine-readable report file (key<TAB>value)");

  auto* ablate = app.add_subcommand("ablate", "Evaluate every stream subset on identical splits");
  ablate->add_option("--data", data, "Dataset root")->required();
  ablate->add_option("--report", report_path, "Machine-readable report file (key<TAB>value)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const PipelineConfig cfg = resolve_config(o);
      std::size_t written = 0;
      for (MotionClass c : kAllMotionClasses) {
        for (int i = 0; i < per_class; ++i) {
          VideoClip clip = synth_generate(c, cfg.seed + static_cast<std::uint64_t>(i), spec);
          save_frame_sequence(clip, fs::path(out) / std::string(to_string(c)) / clip.id);
          ++written;
        }
      }
      std::cerr << "wrote " << written << " videos to " << out << "\n";
    } else if (extract->parsed()) {
      const PipelineConfig cfg = resolve_config(o);
      const ExtractResult r = run_extract(data, cfg, &std::cerr);
      std::cout << "videos\t" << r.cache_files.size() << "\ncomputed\t" << r.computed << "\ncache_hits\t" << r.cache_hits
                << "\nexcluded\t" << r.excluded.size() << "\ncache_dir\t" << cfg.cache_dir.string() << "\n";
    } else if (codebook->parsed()) {
      const PipelineConfig cfg = resolve_config(o);
      const std::vector<VideoDescriptors> v = all_videos(data, cfg);
      const TrainedModel model = fit_codebook_stage(v, cfg, cfg.seed);
      save_model(out, model, cfg);
      std::cerr << "codebook " << model.codebook.size() << " x " << model.codebook.dim() << " written to " << out << "\n";
    } else if (train->parsed()) {
      PipelineConfig cfg = resolve_config(o);
      const std::vector<VideoDescriptors> v = all_videos(data, cfg);
      TrainedModel model;
      if (codebook_dir.empty()) {
        model = fit_codebook_stage(v, cfg, cfg.seed);
      } else {
        PipelineConfig saved;
        model = load_model(codebook_dir, &saved, false);
        if (saved.streams != cfg.streams) {
          fail(ErrorKind::invalid_argument, "codebook was built for streams " + format_stream_list(saved.streams) +
                                                ", not " + format_stream_list(cfg.streams));
        }
      }
      fit_classifier_stage(model, v, cfg);
      save_model(out, model, cfg);
      std::cerr << "model with " << model.svm.num_classes() << " classes written to " << out << "\n";
    } else if (pred->parsed()) {
      PipelineConfig cfg;
      const TrainedModel model = load_model(model_dir, &cfg);
      for (const std::string& dir : videos) {
        VideoClip clip = load_frame_sequence(dir);
        clip.id = dir;
        const VideoDescriptors d = extract_video(clip, cfg);
        if (d.trajectories == 0) {
          std::cout << dir << "\t(no trajectories)\n";
          continue;
        }
        const Prediction p = predict_video(model, d);
        std::cout << dir << '\t' << model.svm.labels[p.class_index];
        for (Eigen::Index k = 0; k < p.scores.size(); ++k) std::cout << '\t' << p.scores[k];
        std::cout << '\n';
      }
    } else if (eval->parsed()) {
      const PipelineConfig cfg = resolve_config(o);
      const RunReport report = run_evaluate(data, cfg, &std::cerr);
      print_report_table(std::cout, report);
      if (!report_path.empty()) {
        std::ostringstream tsv;
        write_report(tsv, report);
        write_text(report_path, tsv.str());
      }
    } else if (ablate->parsed()) {
      const PipelineConfig cfg = resolve_config(o);
      const AblationReport report = run_ablation(data, cfg, &std::cerr);
      print_report_table(std::cout, report);
      if (!report_path.empty()) {
        std::ostringstream tsv;
        write_report(tsv, report);
        write_text(report_path, tsv.str());
      }
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

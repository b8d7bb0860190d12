#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tstdd/classifier.hpp"
#include "tstdd/encoding.hpp"
#include "tstdd/featmaps.hpp"
#include "tstdd/optical_flow.hpp"
#include "tstdd/temporal_reps.hpp"
#include "tstdd/trajectories.hpp"

namespace tstdd {

struct PipelineConfig {
  // extraction
  FlowConfig flow;
  OfsdiConfig ofsdi;
  MhiConfig mhi;
  StackConfig stack;
  TrajectoryConfig trajectory;
  FilterBankConfig filterbank;
  // model
  int pca_dim = 256;
  int codebook_size = 4000;
  LlcConfig llc;
  KMeansConfig kmeans;
  double whiten_retain = 0.99;
  SvmConfig svm;
  // protocol
  std::vector<Stream> streams = {kAllStreams.begin(), kAllStreams.end()};
  int train_per_class = 30;
  double train_fraction = 0.0;  // used instead of train_per_class when > 0
  int repeats = 5;
  std::uint64_t seed = 0;
  std::filesystem::path cache_dir = "tstdd_cache";
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
  bool has_stream(Stream s) const;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Every setting as `key = value` pairs in a fixed order.
KeyValues to_kv(const PipelineConfig& cfg);

/// Only the settings that influence descriptor extraction; used for cache keys.
KeyValues extraction_kv(const PipelineConfig& cfg);

std::string format_kv(const KeyValues& kv);

/// Applies one setting; unknown keys and malformed values are invalid_argument errors.
void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);

/// Parses flat `key = value` text; '#' starts a comment. Starts from the defaults.
PipelineConfig parse_config(std::string_view text, std::string_view context = "config");
PipelineConfig load_config(const std::filesystem::path& path);

std::vector<Stream> parse_stream_list(std::string_view text);
std::string format_stream_list(const std::vector<Stream>& streams);

}  // namespace tstdd

#include "tstdd/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tstdd/error.hpp"

namespace tstdd {

namespace {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  fail(ErrorKind::invalid_argument,
       "config: bad value '" + std::string(value) + "' for " + std::string(key) + " (expected " + std::string(expected) + ")");
}

template <class T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) bad_value(key, value, "a real number");
  return out;
}

struct Field {
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, std::string_view, std::string_view)> set;
  bool extraction = false;
};

template <class T>
Field int_field(T PipelineConfig::*member_owner, int T::*member, bool extraction) {
  return {[=](const PipelineConfig& c) { return std::to_string(c.*member_owner.*member); },
          [=](PipelineConfig& c, std::string_view k, std::string_view v) { c.*member_owner.*member = parse_integer<int>(k, v); },
          extraction};
}

template <class T>
Field real_field(T PipelineConfig::*member_owner, double T::*member, bool extraction) {
  return {[=](const PipelineConfig& c) { return format_real(c.*member_owner.*member); },
          [=](PipelineConfig& c, std::string_view k, std::string_view v) { c.*member_owner.*member = parse_real(k, v); },
          extraction};
}

Field top_int(int PipelineConfig::*member) {
  return {[=](const PipelineConfig& c) { return std::to_string(c.*member); },
          [=](PipelineConfig& c, std::string_view k, std::string_view v) { c.*member = parse_integer<int>(k, v); }};
}

Field top_real(double PipelineConfig::*member) {
  return {[=](const PipelineConfig& c) { return format_real(c.*member); },
          [=](PipelineConfig& c, std::string_view k, std::string_view v) { c.*member = parse_real(k, v); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  using C = PipelineConfig;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"flow.pyramid_levels", int_field(&C::flow, &FlowConfig::pyramid_levels, true)},
      {"flow.smoothness_weight", real_field(&C::flow, &FlowConfig::smoothness_weight, true)},
      {"flow.iterations_per_level", int_field(&C::flow, &FlowConfig::iterations_per_level, true)},
      {"flow.quantization_bound", real_field(&C::flow, &FlowConfig::quantization_bound, true)},
      {"ofsdi.alpha", real_field(&C::ofsdi, &OfsdiConfig::alpha, true)},
      {"ofsdi.init",
       {[](const C& c) { return std::string(c.ofsdi.init_mode == OfsdiInit::zeros ? "zeros" : "first_flow_image"); },
        [](C& c, std::string_view k, std::string_view v) {
          if (v == "first_flow_image") c.ofsdi.init_mode = OfsdiInit::first_flow_image;
          else if (v == "zeros") c.ofsdi.init_mode = OfsdiInit::zeros;
          else bad_value(k, v, "first_flow_image or zeros");
        },
        true}},
      {"mhi.tau", int_field(&C::mhi, &MhiConfig::tau, true)},
      {"mhi.motion_threshold", int_field(&C::mhi, &MhiConfig::motion_threshold, true)},
      {"stack.window", int_field(&C::stack, &StackConfig::window, true)},
      {"trajectory.stride", int_field(&C::trajectory, &TrajectoryConfig::stride, true)},
      {"trajectory.length", int_field(&C::trajectory, &TrajectoryConfig::length, true)},
      {"trajectory.static_threshold", real_field(&C::trajectory, &TrajectoryConfig::static_threshold, true)},
      {"trajectory.erratic_threshold", real_field(&C::trajectory, &TrajectoryConfig::erratic_threshold, true)},
      {"trajectory.median_radius", int_field(&C::trajectory, &TrajectoryConfig::median_radius, true)},
      {"filterbank.stages", int_field(&C::filterbank, &FilterBankConfig::stages, true)},
      {"filterbank.orientations", int_field(&C::filterbank, &FilterBankConfig::orientations, true)},
      {"filterbank.max_channels", int_field(&C::filterbank, &FilterBankConfig::max_channels, true)},
      {"filterbank.tilt", real_field(&C::filterbank, &FilterBankConfig::tilt, true)},
      {"pca.dim", top_int(&C::pca_dim)},
      {"codebook.size", top_int(&C::codebook_size)},
      {"llc.k_bases", int_field(&C::llc, &LlcConfig::k_bases, false)},
      {"llc.lambda", real_field(&C::llc, &LlcConfig::lambda, false)},
      {"llc.samples_per_video", int_field(&C::llc, &LlcConfig::samples_per_video, false)},
      {"llc.pooling",
       {[](const C& c) { return std::string(c.llc.pooling == Pooling::sum ? "sum" : "max"); },
        [](C& c, std::string_view k, std::string_view v) {
          if (v == "max") c.llc.pooling = Pooling::max;
          else if (v == "sum") c.llc.pooling = Pooling::sum;
          else bad_value(k, v, "max or sum");
        }}},
      {"kmeans.max_iterations", int_field(&C::kmeans, &KMeansConfig::max_iterations, false)},
      {"kmeans.tolerance", real_field(&C::kmeans, &KMeansConfig::tolerance, false)},
      {"whiten.retain", top_real(&C::whiten_retain)},
      {"svm.c", real_field(&C::svm, &SvmConfig::c, false)},
      {"svm.tolerance", real_field(&C::svm, &SvmConfig::tolerance, false)},
      {"svm.max_epochs", int_field(&C::svm, &SvmConfig::max_epochs, false)},
      {"streams",
       {[](const C& c) { return format_stream_list(c.streams); },
        [](C& c, std::string_view, std::string_view v) { c.streams = parse_stream_list(v); }}},
      {"split.train_per_class", top_int(&C::train_per_class)},
      {"split.train_fraction", top_real(&C::train_fraction)},
      {"repeats", top_int(&C::repeats)},
      {"seed",
       {[](const C& c) { return std::to_string(c.seed); },
        [](C& c, std::string_view k, std::string_view v) { c.seed = parse_integer<std::uint64_t>(k, v); }}},
      {"cache_dir",
       {[](const C& c) { return c.cache_dir.string(); },
        [](C& c, std::string_view k, std::string_view v) {
          if (v.empty()) bad_value(k, v, "a directory path");
          c.cache_dir = std::string(v);
        }}},
      {"threads", top_int(&C::threads)},
  };
  return table;
}

}  // namespace

void PipelineConfig::validate() const {
  flow.validate();
  ofsdi.validate();
  mhi.validate();
  require(stack.window >= 1, "config: stack.window must be >= 1");
  trajectory.validate();
  filterbank.validate();
  llc.validate();
  svm.validate();
  require(pca_dim >= 1, "config: pca.dim must be >= 1");
  require(codebook_size >= 1, "config: codebook.size must be >= 1");
  require(llc.k_bases <= codebook_size, "config: llc.k_bases must not exceed codebook.size");
  require(kmeans.max_iterations >= 1 && kmeans.tolerance >= 0.0, "config: bad k-means settings");
  require(whiten_retain > 0.0 && whiten_retain < 1.0, "config: whiten.retain must lie in (0, 1)");
  require(!streams.empty(), "config: at least one stream must be enabled");
  require(repeats >= 1, "config: repeats must be >= 1");
  require(train_fraction >= 0.0 && train_fraction < 1.0, "config: split.train_fraction must lie in [0, 1)");
  require(train_fraction > 0.0 || train_per_class >= 1, "config: split.train_per_class must be >= 1");
  require(threads >= 0, "config: threads must be >= 0");
}

bool PipelineConfig::has_stream(Stream s) const { return std::find(streams.begin(), streams.end(), s) != streams.end(); }

KeyValues to_kv(const PipelineConfig& cfg) {
  KeyValues out;
  for (const auto& [key, field] : fields()) out.emplace_back(key, field.get(cfg));
  return out;
}

KeyValues extraction_kv(const PipelineConfig& cfg) {
  KeyValues out;
  for (const auto& [key, field] : fields())
    if (field.extraction) out.emplace_back(key, field.get(cfg));
  return out;
}

std::string format_kv(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(cfg, key, trim(value));
      return;
    }
  }
  fail(ErrorKind::invalid_argument, "config: unknown key '" + std::string(key) + "'");
}

PipelineConfig parse_config(std::string_view text, std::string_view context) {
  PipelineConfig cfg;
  std::map<std::string, int, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(context) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) fail(ErrorKind::invalid_argument, where + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (seen.contains(key)) {
      fail(ErrorKind::invalid_argument, where + ": duplicate key '" + key + "' (first set on line " +
                                            std::to_string(seen[key]) + ")");
    }
    seen[key] = line_no;
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.kind(), where + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(e.kind(), std::string(context) + ": " + e.what());
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) fail(ErrorKind::io, "cannot open config file: " + path.string());
  std::ostringstream text;
  text << file.rdbuf();
  return parse_config(text.str(), path.string());
}

std::vector<Stream> parse_stream_list(std::string_view text) {
  std::vector<Stream> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string_view name = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (name.empty()) continue;
    const Stream s = parse_stream(name);
    if (std::find(out.begin(), out.end(), s) != out.end()) {
      fail(ErrorKind::invalid_argument, "stream '" + std::string(name) + "' listed twice");
    }
    out.push_back(s);
  }
  if (out.empty()) fail(ErrorKind::invalid_argument, "stream list is empty");
  std::sort(out.begin(), out.end());
  return out;
}

std::string format_stream_list(const std::vector<Stream>& streams) {
  std::string out;
  for (Stream s : streams) {
    if (!out.empty()) out += ",";
    out += to_string(s);
  }
  return out;
}

}  // namespace tstdd

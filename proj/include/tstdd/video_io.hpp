#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tstdd {

inline constexpr int kMinFrameSide = 16;

/// 8-bit grayscale frame, row-major.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h, std::uint8_t fill = 0) : width(w), height(h), pixels(std::size_t(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }

  bool operator==(const Frame&) const = default;
};

/// Immutable once built; all frames share the same dimensions and L >= 2.
struct VideoClip {
  std::vector<Frame> frames;
  std::string id;
  std::optional<int> class_label;

  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
  int length() const { return static_cast<int>(frames.size()); }
};

void validate_frame(const Frame& frame, std::string_view name);
void validate_clip(const VideoClip& clip);

Frame read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Frame& frame);

// Gray PNGs load as-is; color PNGs collapse to the unweighted channel mean, rounded half-up.
Frame read_png(const std::filesystem::path& path);

// Dispatches on file contents (P5 header or PNG signature).
Frame read_frame(const std::filesystem::path& path);

std::uint8_t gray_from_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Matches regular files in `directory` against a shell glob, sorted lexicographically by name.
VideoClip load_frame_sequence(const std::filesystem::path& directory,
                              std::string_view glob_pattern = "frame_*.pgm");

// Writes frame_00000.pgm, frame_00001.pgm, ...
void save_frame_sequence(const VideoClip& clip, const std::filesystem::path& directory);

// ---------------------------------------------------------------------------
// Synthetic clips

enum class MotionClass { translate_right, translate_left, expand, oscillate };

inline constexpr MotionClass kAllMotionClasses[] = {MotionClass::translate_right, MotionClass::translate_left,
                                                   MotionClass::expand, MotionClass::oscillate};

std::string_view to_string(MotionClass c);
MotionClass parse_motion_class(std::string_view name);

struct SynthSpec {
  int width = 64;
  int height = 64;
  int length = 30;
  double noise_amplitude = 20.0;  // texture amplitude, grey levels
};

// Oscillation period in frames; the blob's x position repeats with this period.
inline constexpr int kOscillationPeriod = 10;

/// A textured bright disc moving over a static textured background according to the
/// class's motion law. Pure function of its arguments.
///   translate-right/left: 1 px per frame horizontally
///   expand: radius grows 0.5 px per frame about a fixed center
///   oscillate: x = x0 + 7 sin(2 pi t / 10), rounded to whole pixels
VideoClip synth_generate(MotionClass motion, std::uint64_t seed, const SynthSpec& spec = {});

}  // namespace tstdd

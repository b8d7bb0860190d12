#include "tstdd/video_io.hpp"

#include <fnmatch.h>
#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "tstdd/error.hpp"
#include "tstdd/rng.hpp"

namespace tstdd {

namespace fs = std::filesystem;

void validate_frame(const Frame& frame, std::string_view name) {
  if (frame.width < kMinFrameSide || frame.height < kMinFrameSide) {
    fail(ErrorKind::invalid_argument, std::string(name) + ": frame smaller than 16x16 (" +
                                          std::to_string(frame.width) + "x" + std::to_string(frame.height) + ")");
  }
  if (frame.pixels.size() != std::size_t(frame.width) * frame.height) {
    fail(ErrorKind::invalid_argument, std::string(name) + ": pixel count does not match dimensions");
  }
}

void validate_clip(const VideoClip& clip) {
  if (clip.frames.size() < 2) fail(ErrorKind::invalid_argument, clip.id + ": clip needs at least 2 frames");
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    const Frame& f = clip.frames[i];
    validate_frame(f, clip.id + " frame " + std::to_string(i + 1));
    if (f.width != clip.width() || f.height != clip.height()) {
      fail(ErrorKind::invalid_argument, clip.id + ": dimension mismatch at frame " + std::to_string(i + 1));
    }
  }
}

// ---------------------------------------------------------------------------
// PGM

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

int parse_positive(const std::string& token, const fs::path& path, const char* field) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used == token.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::format, path.string() + ": invalid PGM " + field + " '" + token + "'");
}

}  // namespace

Frame read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open frame: " + path.string());
  if (pgm_token(in) != "P5") fail(ErrorKind::format, path.string() + ": not a binary PGM (P5)");
  const int w = parse_positive(pgm_token(in), path, "width");
  const int h = parse_positive(pgm_token(in), path, "height");
  const int maxval = parse_positive(pgm_token(in), path, "maxval");
  if (maxval != 255) fail(ErrorKind::format, path.string() + ": only maxval 255 is supported");
  // The single whitespace after maxval was consumed by pgm_token.
  Frame frame(w, h);
  in.read(reinterpret_cast<char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != frame.pixels.size()) {
    fail(ErrorKind::format, path.string() + ": truncated PGM pixel data");
  }
  return frame;
}

void write_pgm(const fs::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write frame: " + path.string());
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// PNG

std::uint8_t gray_from_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // round(s / 3) half-up; s / 3 never has a fractional part of exactly one half.
  const int s = int(r) + int(g) + int(b);
  return static_cast<std::uint8_t>((2 * s + 3) / 6);
}

Frame read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    fail(ErrorKind::format, path.string() + ": undecodable PNG (" + image.message + ")");
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    fail(ErrorKind::format, path.string() + ": only 8-bit PNG is supported");
  }
  const bool color = image.format & PNG_FORMAT_FLAG_COLOR;
  const bool alpha = image.format & PNG_FORMAT_FLAG_ALPHA;
  image.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB) : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  const int channels = PNG_IMAGE_SAMPLE_CHANNELS(image.format);
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    fail(ErrorKind::format, path.string() + ": undecodable PNG (" + message + ")");
  }
  Frame frame(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
    const std::uint8_t* px = buffer.data() + i * channels;
    frame.pixels[i] = color ? gray_from_rgb(px[0], px[1], px[2]) : px[0];
  }
  return frame;
}

Frame read_frame(const fs::path& path) {
  std::array<char, 8> head{};
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open frame: " + path.string());
    in.read(head.data(), head.size());
  }
  static constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (std::equal(kPngSignature.begin(), kPngSignature.end(), reinterpret_cast<unsigned char*>(head.data()))) {
    return read_png(path);
  }
  if (head[0] == 'P' && head[1] == '5') return read_pgm(path);
  fail(ErrorKind::format, path.string() + ": undecodable frame (neither P5 PGM nor PNG)");
}

VideoClip load_frame_sequence(const fs::path& directory, std::string_view glob_pattern) {
  if (!fs::is_directory(directory)) fail(ErrorKind::io, "missing frame directory: " + directory.string());
  const std::string pattern(glob_pattern);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    if (fnmatch(pattern.c_str(), entry.path().filename().c_str(), 0) == 0) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (files.size() < 2) {
    fail(ErrorKind::io, directory.string() + ": fewer than 2 frames match '" + pattern + "'");
  }

  VideoClip clip;
  clip.id = directory.filename().string();
  clip.frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    Frame f = read_frame(files[i]);
    validate_frame(f, files[i].string());
    if (i > 0 && (f.width != clip.frames[0].width || f.height != clip.frames[0].height)) {
      fail(ErrorKind::format, files[i].string() + ": dimension mismatch at frame " + std::to_string(i + 1) + " (" +
                                  std::to_string(f.width) + "x" + std::to_string(f.height) + " vs " +
                                  std::to_string(clip.frames[0].width) + "x" +
                                  std::to_string(clip.frames[0].height) + ")");
    }
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

void save_frame_sequence(const VideoClip& clip, const fs::path& directory) {
  fs::create_directories(directory);
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.pgm", i);
    write_pgm(directory / name, clip.frames[i]);
  }
}

// ---------------------------------------------------------------------------
// Synthetic clips

std::string_view to_string(MotionClass c) {
  switch (c) {
    case MotionClass::translate_right: return "translate-right";
    case MotionClass::translate_left: return "translate-left";
    case MotionClass::expand: return "expand";
    case MotionClass::oscillate: return "oscillate";
  }
  return "?";
}

MotionClass parse_motion_class(std::string_view name) {
  for (MotionClass c : kAllMotionClasses) {
    if (to_string(c) == name) return c;
  }
  fail(ErrorKind::invalid_argument, "unknown motion class '" + std::string(name) + "'");
}

namespace {

// Random field smoothed with a 3x3 binomial, wrap-around at the borders.
std::vector<double> smooth_noise(int w, int h, double amplitude, Rng& rng) {
  std::vector<double> raw(std::size_t(w) * h);
  for (double& v : raw) v = rng.uniform(-amplitude, amplitude);
  std::vector<double> out(raw.size());
  static constexpr double k[3] = {0.25, 0.5, 0.25};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = (x + dx + w) % w;
          const int yy = (y + dy + h) % h;
          acc += k[dx + 1] * k[dy + 1] * raw[std::size_t(yy) * w + xx];
        }
      }
      // The binomial halves the spread; scale back toward the requested amplitude.
      out[std::size_t(y) * w + x] = 2.0 * acc;
    }
  }
  return out;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)); }

constexpr double kBackgroundLevel = 60.0;
constexpr double kBlobLevel = 185.0;
constexpr int kBlobTexture = 64;  // side of the blob's texture tile

}  // namespace

VideoClip synth_generate(MotionClass motion, std::uint64_t seed, const SynthSpec& spec) {
  require(spec.width >= kMinFrameSide && spec.height >= kMinFrameSide, "synth: frame must be at least 16x16");
  require(spec.length >= 2, "synth: clip needs at least 2 frames");
  require(spec.noise_amplitude >= 0.0, "synth: noise amplitude must be non-negative");

  Rng rng(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(motion) + 1);
  const int w = spec.width;
  const int h = spec.height;
  const int last = spec.length - 1;

  const std::vector<double> background = smooth_noise(w, h, spec.noise_amplitude, rng);
  const std::vector<double> blob_texture = smooth_noise(kBlobTexture, kBlobTexture, spec.noise_amplitude, rng);

  // Per-clip jitter of the start position (whole pixels keep translation exact).
  const int jitter_x = static_cast<int>(rng.below(5)) - 2;
  const int jitter_y = static_cast<int>(rng.below(9)) - 4;
  const int cy = h / 2 + jitter_y;

  struct Pose {
    double cx, cy, radius, texture_scale;
  };
  auto pose_at = [&](int t) -> Pose {
    switch (motion) {
      case MotionClass::translate_right: {
        const int x0 = w / 2 - last / 2 + jitter_x;
        return {double(x0 + t), double(cy), 8.0, 1.0};
      }
      case MotionClass::translate_left: {
        const int x0 = w / 2 + last / 2 + jitter_x;
        return {double(x0 - t), double(cy), 8.0, 1.0};
      }
      case MotionClass::expand: {
        const double r = 4.0 + 0.5 * t;
        return {double(w / 2 + jitter_x), double(cy), r, r / 4.0};
      }
      case MotionClass::oscillate: {
        const double phase = 2.0 * std::numbers::pi * double(t % kOscillationPeriod) / kOscillationPeriod;
        const double x = std::floor(w / 2 + jitter_x + 7.0 * std::sin(phase) + 0.5);
        return {x, double(cy), 8.0, 1.0};
      }
    }
    return {0, 0, 0, 1};
  };

  VideoClip clip;
  clip.id = std::string(to_string(motion)) + "_" + std::to_string(seed);
  clip.frames.reserve(spec.length);
  for (int t = 0; t < spec.length; ++t) {
    const Pose pose = pose_at(t);
    Frame frame(w, h);
    const double r2 = pose.radius * pose.radius;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dx = x - pose.cx;
        const double dy = y - pose.cy;
        double value;
        if (dx * dx + dy * dy <= r2) {
          // Texture is attached to the blob so it moves (and scales) with it.
          const int tx = static_cast<int>(std::floor(dx / pose.texture_scale)) + kBlobTexture / 2;
          const int ty = static_cast<int>(std::floor(dy / pose.texture_scale)) + kBlobTexture / 2;
          const int wx = ((tx % kBlobTexture) + kBlobTexture) % kBlobTexture;
          const int wy = ((ty % kBlobTexture) + kBlobTexture) % kBlobTexture;
          value = kBlobLevel + blob_texture[std::size_t(wy) * kBlobTexture + wx];
        } else {
          value = kBackgroundLevel + background[std::size_t(y) * w + x];
        }
        frame.at(x, y) = to_byte(value);
      }
    }
    clip.frames.push_back(std::move(frame));
  }
  return clip;
}

}  // namespace tstdd

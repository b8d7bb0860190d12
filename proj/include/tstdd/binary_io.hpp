#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tstdd {

/// Little-endian primitive writer for the project's binary file formats.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag);
  void u8(std::uint8_t value);
  void u32(std::uint32_t value);
  void f32(float value);
  void f64(double value);
  void text(std::string_view value);  // u32 length prefix, then bytes

 private:
  void raw(const void* data, std::size_t size);
  std::ostream& out_;
};

/// Little-endian reader. Every short read raises a format error carrying `context`.
class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string context) : in_(in), context_(std::move(context)) {}

  void expect_magic(std::string_view tag);
  std::uint8_t u8();
  std::uint32_t u32();
  float f32();
  double f64();
  std::string text(std::uint32_t max_length = 1u << 16);
  bool at_end();

  const std::string& context() const { return context_; }

 private:
  void raw(void* data, std::size_t size);
  std::istream& in_;
  std::string context_;
};

// 64-bit FNV-1a, used for cache keys.
class Fnv1a {
 public:
  void update(std::span<const std::uint8_t> bytes);
  void update(std::string_view text);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

std::string hex64(std::uint64_t value);

/// Writes through a temporary sibling and renames, so readers never observe partial files.
void write_file_atomically(const std::filesystem::path& path, const std::string& bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace tstdd

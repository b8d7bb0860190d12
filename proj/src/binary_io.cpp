#include "tstdd/binary_io.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tstdd/error.hpp"

namespace tstdd {

namespace {

template <class T>
std::array<std::uint8_t, sizeof(T)> to_le(T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  std::array<std::uint8_t, sizeof(T)> out{};
  for (std::size_t i = 0; i < sizeof(T); ++i) out[i] = static_cast<std::uint8_t>(bits >> (8 * i));
  return out;
}

template <class T>
T from_le(const std::array<std::uint8_t, sizeof(T)>& bytes) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

void BinaryWriter::raw(const void* data, std::size_t size) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out_) fail(ErrorKind::io, "write failed");
}

void BinaryWriter::magic(std::string_view tag) { raw(tag.data(), tag.size()); }

void BinaryWriter::u8(std::uint8_t value) { raw(&value, 1); }

void BinaryWriter::u32(std::uint32_t value) {
  const auto bytes = to_le(value);
  raw(bytes.data(), bytes.size());
}

void BinaryWriter::f32(float value) {
  const auto bytes = to_le(value);
  raw(bytes.data(), bytes.size());
}

void BinaryWriter::f64(double value) {
  const auto bytes = to_le(value);
  raw(bytes.data(), bytes.size());
}

void BinaryWriter::text(std::string_view value) {
  u32(static_cast<std::uint32_t>(value.size()));
  raw(value.data(), value.size());
}

void BinaryReader::raw(void* data, std::size_t size) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(in_.gcount()) != size) {
    fail(ErrorKind::format, context_ + ": unexpected end of data (record count mismatch)");
  }
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  in_.read(got.data(), static_cast<std::streamsize>(tag.size()));
  if (static_cast<std::size_t>(in_.gcount()) != tag.size() || got != tag) {
    fail(ErrorKind::format, context_ + ": bad magic, expected '" + std::string(tag) + "'");
  }
}

std::uint8_t BinaryReader::u8() {
  std::uint8_t v;
  raw(&v, 1);
  return v;
}

std::uint32_t BinaryReader::u32() {
  std::array<std::uint8_t, 4> b{};
  raw(b.data(), b.size());
  return from_le<std::uint32_t>(b);
}

float BinaryReader::f32() {
  std::array<std::uint8_t, 4> b{};
  raw(b.data(), b.size());
  return from_le<float>(b);
}

double BinaryReader::f64() {
  std::array<std::uint8_t, 8> b{};
  raw(b.data(), b.size());
  return from_le<double>(b);
}

std::string BinaryReader::text(std::uint32_t max_length) {
  const std::uint32_t n = u32();
  if (n > max_length) fail(ErrorKind::format, context_ + ": text field too long");
  std::string s(n, '\0');
  if (n > 0) raw(s.data(), n);
  return s;
}

bool BinaryReader::at_end() { return in_.peek() == std::char_traits<char>::eof(); }

void Fnv1a::update(std::span<const std::uint8_t> bytes) {
  for (const std::uint8_t b : bytes) {
    state_ ^= b;
    state_ *= 0x100000001b3ull;
  }
}

void Fnv1a::update(std::string_view text) {
  update(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::io, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace tstdd

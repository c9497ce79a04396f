#pragma once

// Little-endian byte encoding shared by the VPRF/VPRD/VPRP/VPRG containers,
// plus atomic (write-to-temp, rename) file output.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hvpr {

class ByteWriter {
 public:
  void magic(std::string_view tag);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void bytes(std::string_view s);
  // u16 length prefix followed by the raw bytes.
  void string16(std::string_view s);

  [[nodiscard]] const std::vector<std::uint8_t>& buffer() const noexcept { return buf_; }
  [[nodiscard]] std::vector<std::uint8_t> take() && { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked reader; running off the end throws Error(kTruncated).
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  // Throws kBadMagic if the next four bytes differ from `tag`.
  void expect_magic(std::string_view tag);
  // Throws kVersionMismatch unless the next u32 equals `version`.
  void expect_version(std::uint32_t version);

  std::uint16_t u16();
  std::uint32_t u32();
  float f32();
  std::string string16();
  void f32_array(std::span<float> out);

  [[nodiscard]] std::size_t remaining() const noexcept { return data_.size() - pos_; }
  [[nodiscard]] std::size_t offset() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> take(std::size_t n);

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace hvpr

#include "hvpr/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>

#include "hvpr/error.hpp"

namespace hvpr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kMalformed: return "malformed";
  }
  return "unknown";
}

void ByteWriter::magic(std::string_view tag) { bytes(tag.substr(0, 4)); }

void ByteWriter::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v & 0xFFu));
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    buf_.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFFu));
  }
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

void ByteWriter::string16(std::string_view s) {
  if (s.size() > 0xFFFFu) {
    throw Error(ErrorCode::kOutOfRange, "string longer than 65535 bytes: " + std::string(s.substr(0, 32)));
  }
  u16(static_cast<std::uint16_t>(s.size()));
  bytes(s);
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (n > remaining()) {
    throw Error(ErrorCode::kTruncated, "unexpected end of data at offset " + std::to_string(pos_) +
                                           " (need " + std::to_string(n) + " bytes, have " +
                                           std::to_string(remaining()) + ")");
  }
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

void ByteReader::expect_magic(std::string_view tag) {
  auto got = take(4);
  if (std::memcmp(got.data(), tag.data(), 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "bad magic, expected \"" + std::string(tag) + "\"");
  }
}

void ByteReader::expect_version(std::uint32_t version) {
  const auto got = u32();
  if (got != version) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported version " + std::to_string(got) + ", expected " + std::to_string(version));
  }
}

std::uint16_t ByteReader::u16() {
  auto b = take(2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t ByteReader::u32() {
  auto b = take(4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

std::string ByteReader::string16() {
  const auto n = u16();
  auto b = take(n);
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

void ByteReader::f32_array(std::span<float> out) {
  auto b = take(out.size() * 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint8_t* p = b.data() + 4 * i;
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    out[i] = std::bit_cast<float>(bits);
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename onto " + path.string());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace hvpr

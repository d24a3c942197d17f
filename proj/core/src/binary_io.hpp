#pragma once

// Little-endian byte buffers shared by the feature and checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <vector>

#include "rda/errors.hpp"

namespace rda::detail {

static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
static_assert(sizeof(float) == 4);

class ByteWriter {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    buffer_.insert(buffer_.end(), p, p + n);
  }
  void u8(std::uint8_t v) { buffer_.push_back(v); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void f32(float v) { bytes(&v, sizeof v); }
  void f32s(std::span<const float> v) { bytes(v.data(), v.size_bytes()); }

  std::vector<std::uint8_t> take() { return std::move(buffer_); }

 private:
  std::vector<std::uint8_t> buffer_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  /// Throws FormatError(Truncated) naming `what` when fewer than n bytes remain.
  void require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(FormatErrorKind::Truncated,
                        std::string("need ") + std::to_string(n) + " bytes for " + what + ", " +
                            std::to_string(remaining()) + " available");
    }
  }
  void bytes(void* out, std::size_t n, const char* what) {
    require(n, what);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8(const char* what) {
    std::uint8_t v;
    bytes(&v, 1, what);
    return v;
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    bytes(&v, sizeof v, what);
    return v;
  }
  float f32(const char* what) {
    float v;
    bytes(&v, sizeof v, what);
    return v;
  }
  void f32s(std::span<float> out, const char* what) { bytes(out.data(), out.size_bytes(), what); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace rda::detail

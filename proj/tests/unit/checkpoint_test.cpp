#include <gtest/gtest.h>

#include <cstring>
#include <limits>

#include "rda/checkpoint.hpp"
#include "rda/errors.hpp"
#include "test_support.hpp"

namespace rda {
namespace {

DenoiserParams<float> sample_params() { return make_denoiser<float>(8, ArchitectureConfig{}, 0.75, 21); }

FormatErrorKind failure(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_checkpoint(bytes);
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode accepted corrupted bytes";
  return FormatErrorKind::BadDocument;
}

TEST(Checkpoint, LayoutMatchesDeclaredSizes) {
  const auto params = sample_params();
  const auto bytes = encode_checkpoint(params);
  std::size_t expected = 16 + 4;
  for (const auto& l : params.net.layers()) expected += 9 + 4 * (l.rows * l.cols + l.rows);
  EXPECT_EQ(bytes.size(), expected);
  EXPECT_EQ(std::memcmp(bytes.data(), "RDAM", 4), 0);
  float sd;
  std::memcpy(&sd, bytes.data() + bytes.size() - 4, 4);
  EXPECT_EQ(sd, 0.75f);
  // First layer header: rows 4 (= 8/2), cols 9 (= 8 + 1), activation SiLU.
  std::uint32_t rows, cols;
  std::memcpy(&rows, bytes.data() + 16, 4);
  std::memcpy(&cols, bytes.data() + 20, 4);
  EXPECT_EQ(rows, 4u);
  EXPECT_EQ(cols, 9u);
  EXPECT_EQ(bytes[24], static_cast<std::uint8_t>(Activation::Silu));
}

TEST(Checkpoint, RoundTripIsExact) {
  testing::TempDir dir("ckpt");
  const auto params = sample_params();
  save_checkpoint(params, dir / "m.rdam");
  EXPECT_EQ(load_checkpoint(dir / "m.rdam"), params);
}

TEST(Checkpoint, CorruptionIsRejected) {
  const auto good = encode_checkpoint(sample_params());
  {
    auto b = good;
    b[0] = 'X';
    EXPECT_EQ(failure(b), FormatErrorKind::MagicMismatch);
  }
  {
    auto b = good;
    b[4] = 2;
    EXPECT_EQ(failure(b), FormatErrorKind::BadVersion);
  }
  {
    auto b = good;
    b[8] = 0;  // feature dim 0
    EXPECT_EQ(failure(b), FormatErrorKind::BadHeader);
  }
  {
    auto b = good;
    b[24] = 9;  // activation code
    EXPECT_EQ(failure(b), FormatErrorKind::BadHeader);
  }
  {
    auto b = good;
    b.pop_back();
    EXPECT_EQ(failure(b), FormatErrorKind::Truncated);
  }
  {
    auto b = good;
    b.push_back(0);
    EXPECT_EQ(failure(b), FormatErrorKind::TrailingData);
  }
  {
    auto b = good;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(b.data() + 25, &nan, 4);
    EXPECT_EQ(failure(b), FormatErrorKind::NonFinite);
  }
  {
    auto b = good;
    const float neg = -1.0f;
    std::memcpy(b.data() + b.size() - 4, &neg, 4);
    EXPECT_EQ(failure(b), FormatErrorKind::BadHeader);
  }
  {
    auto b = good;
    b[8] = 7;  // feature dim disagrees with the layers
    EXPECT_EQ(failure(b), FormatErrorKind::InconsistentDims);
  }
}

TEST(Checkpoint, MissingFileIsIoError) {
  testing::TempDir dir("ckpt");
  EXPECT_THROW(load_checkpoint(dir / "absent.rdam"), IoError);
}

}  // namespace
}  // namespace rda

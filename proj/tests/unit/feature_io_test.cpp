#include <gtest/gtest.h>

#include <cstring>
#include <limits>

#include "rda/errors.hpp"
#include "rda/feature_io.hpp"
#include "test_support.hpp"

namespace rda {
namespace {

using testing::TempDir;

FeatureDataset random_dataset(std::size_t n, std::size_t dim, std::uint64_t seed, bool labelled) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 3.0f);
  std::vector<float> values(n * dim);
  for (auto& v : values) v = dist(rng);
  std::vector<Label> labels;
  if (labelled) {
    const Label choices[3] = {Label::Id, Label::Ood, Label::Unlabeled};
    for (std::size_t i = 0; i < n; ++i) labels.push_back(choices[rng() % 3]);
  }
  return FeatureDataset(dim, std::move(values), std::move(labels));
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return std::uint32_t(b[at]) | std::uint32_t(b[at + 1]) << 8 | std::uint32_t(b[at + 2]) << 16 |
         std::uint32_t(b[at + 3]) << 24;
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) b[at + k] = static_cast<std::uint8_t>(v >> (8 * k));
}

FormatErrorKind decode_failure(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_features(bytes);
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode accepted corrupted bytes";
  return FormatErrorKind::BadDocument;
}

TEST(FeatureFile, TwoByThreeIsFortyBytes) {
  TempDir dir("fio");
  FeatureDataset ds(3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(write_features(ds, dir / "a.rdaf"), 40u);
  const auto bytes = testing::slurp(dir / "a.rdaf");
  ASSERT_EQ(bytes.size(), 40u);
  EXPECT_EQ(std::memcmp(bytes.data(), "RDAF", 4), 0);
  EXPECT_EQ(read_u32(bytes, 4), 1u);
  EXPECT_EQ(read_u32(bytes, 8), 2u);
  EXPECT_EQ(read_u32(bytes, 12), 3u);
  float third;
  std::memcpy(&third, bytes.data() + 16 + 2 * 4, 4);
  EXPECT_EQ(third, 3.0f);
}

TEST(FeatureFile, LabelsSetFlagAndTrailingBytes) {
  FeatureDataset ds(2, {1, 2, 3, 4}, {Label::Id, Label::Ood});
  const auto bytes = encode_features(ds);
  ASSERT_EQ(bytes.size(), 16u + 16u + 2u);
  EXPECT_EQ(read_u32(bytes, 4), 1u | kFeatureLabelsFlag);
  EXPECT_EQ(bytes[32], 0);
  EXPECT_EQ(bytes[33], 1);
}

TEST(FeatureFile, EmptyDatasetIsHeaderOnlyAndRoundTrips) {
  TempDir dir("fio");
  FeatureDataset ds(7);
  EXPECT_EQ(write_features(ds, dir / "e.rdaf"), kFeatureHeaderBytes);
  const auto back = read_features(dir / "e.rdaf");
  EXPECT_EQ(back.dim(), 7u);
  EXPECT_EQ(back.size(), 0u);
  EXPECT_EQ(back, ds);
}

TEST(FeatureFile, LargeRoundTripIsBitExact) {
  TempDir dir("fio");
  const auto ds = random_dataset(1000, 512, 11, false);
  write_features(ds, dir / "big.rdaf");
  const auto back = read_features(dir / "big.rdaf");
  ASSERT_EQ(back.size(), 1000u);
  ASSERT_EQ(back.dim(), 512u);
  EXPECT_EQ(std::memcmp(back.values().data(), ds.values().data(), ds.values().size() * sizeof(float)), 0);
  EXPECT_EQ(back.source, (dir / "big.rdaf").string());
}

TEST(FeatureFile, RandomRoundTripProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t n = seed * 3 % 17;
    const std::size_t dim = 1 + seed % 9;
    const auto ds = random_dataset(n, dim, seed, seed % 2 == 0);
    EXPECT_EQ(decode_features(encode_features(ds)), ds) << "seed " << seed;
  }
}

TEST(FeatureFile, BadMagic) {
  auto bytes = encode_features(FeatureDataset(3, {1, 2, 3}));
  std::memcpy(bytes.data(), "XXXX", 4);
  EXPECT_EQ(decode_failure(bytes), FormatErrorKind::MagicMismatch);
}

TEST(FeatureFile, TruncatedPayload) {
  auto ds = random_dataset(10, 4, 1, false);
  auto bytes = encode_features(ds);
  bytes.resize(kFeatureHeaderBytes + 9 * 4 * 4);
  EXPECT_EQ(decode_failure(bytes), FormatErrorKind::Truncated);
}

TEST(FeatureFile, TruncatedHeader) {
  auto bytes = encode_features(FeatureDataset(3, {1, 2, 3}));
  bytes.resize(10);
  EXPECT_EQ(decode_failure(bytes), FormatErrorKind::Truncated);
}

TEST(FeatureFile, EveryCorruptedHeaderFieldIsRejected) {
  const auto good = encode_features(random_dataset(4, 3, 2, true));
  {
    auto b = good;
    b[3] = 'G';
    EXPECT_EQ(decode_failure(b), FormatErrorKind::MagicMismatch);
  }
  {
    auto b = good;
    put_u32(b, 4, 2u | kFeatureLabelsFlag);
    EXPECT_EQ(decode_failure(b), FormatErrorKind::BadVersion);
  }
  {
    auto b = good;
    put_u32(b, 4, 1u | kFeatureLabelsFlag | (1u << 30));
    EXPECT_EQ(decode_failure(b), FormatErrorKind::BadVersion);
  }
  {
    auto b = good;
    put_u32(b, 4, 1u);  // label flag cleared: label bytes become trailing data
    EXPECT_EQ(decode_failure(b), FormatErrorKind::TrailingData);
  }
  {
    auto b = good;
    put_u32(b, 8, 5);
    EXPECT_EQ(decode_failure(b), FormatErrorKind::Truncated);
  }
  {
    auto b = good;
    put_u32(b, 8, 3);
    EXPECT_EQ(decode_failure(b), FormatErrorKind::TrailingData);
  }
  {
    auto b = good;
    put_u32(b, 12, 0);
    EXPECT_EQ(decode_failure(b), FormatErrorKind::BadHeader);
  }
  {
    auto b = good;
    put_u32(b, 12, 4);
    EXPECT_EQ(decode_failure(b), FormatErrorKind::Truncated);
  }
}

TEST(FeatureFile, NonFiniteAndBadLabelsAreDistinct) {
  const auto good = encode_features(FeatureDataset(2, {1, 2, 3, 4}, {Label::Id, Label::Id}));
  auto nan_bytes = good;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan_bytes.data() + 16 + 4, &nan, 4);
  EXPECT_EQ(decode_failure(nan_bytes), FormatErrorKind::NonFinite);

  auto inf_bytes = good;
  const float inf = std::numeric_limits<float>::infinity();
  std::memcpy(inf_bytes.data() + 16, &inf, 4);
  EXPECT_EQ(decode_failure(inf_bytes), FormatErrorKind::NonFinite);

  auto label_bytes = good;
  label_bytes.back() = 7;
  EXPECT_EQ(decode_failure(label_bytes), FormatErrorKind::BadLabel);
}

TEST(FeatureFile, MissingFileIsIoError) {
  TempDir dir("fio");
  EXPECT_THROW(read_features(dir / "nope.rdaf"), IoError);
  EXPECT_THROW(write_features(FeatureDataset(1, {1}), dir / "no_such_dir" / "x.rdaf"), IoError);
}

TEST(FeatureDataset, InvariantsAreChecked) {
  EXPECT_THROW(FeatureDataset(3, {1, 2}), InputError);
  EXPECT_THROW(FeatureDataset(2, {1, 2}, {Label::Id, Label::Ood}), InputError);

  FeatureDataset train(2, {1, 2, 3, 4}, {Label::Id, Label::Ood});
  train.split = Split::Train;
  EXPECT_THROW(train.validate(), InputError);
  train.split = Split::Val;
  EXPECT_NO_THROW(train.validate());
}

TEST(FeatureDataset, PushBackBackfillsLabels) {
  FeatureDataset ds(2);
  ds.push_back(std::vector<float>{1, 2});
  EXPECT_FALSE(ds.has_labels());
  ds.push_back(std::vector<float>{3, 4}, Label::Ood);
  ASSERT_TRUE(ds.has_labels());
  EXPECT_EQ(ds.label(0), Label::Unlabeled);
  EXPECT_EQ(ds.label(1), Label::Ood);
  EXPECT_THROW(ds.push_back(std::vector<float>{1}), InputError);
}

TEST(FeatureDataset, SelectKeepsOrderAndMetadata) {
  FeatureDataset ds(1, {10, 20, 30}, {Label::Id, Label::Ood, Label::Id});
  ds.split = Split::Test;
  ds.source = "here";
  const std::vector<std::size_t> rows{2, 0};
  const auto sub = ds.select(rows);
  EXPECT_EQ(sub, FeatureDataset(1, {30, 10}, {Label::Id, Label::Id}));
  EXPECT_EQ(sub.split, Split::Test);
  EXPECT_EQ(sub.source, "here");
}

TEST(Manifest, RoundTripsAndLoadsEntries) {
  TempDir dir("manifest");
  const FeatureDataset val(2, {1, 2, 3, 4}, {Label::Id, Label::Ood});
  write_features(val, dir / "val.rdaf");
  const std::vector<ManifestEntry> entries{{"val.rdaf", Split::Val, "unit", 2, 2},
                                           {"train.rdaf", Split::Train, "unit", 0, 2}};
  write_manifest(entries, dir / "manifest.json");
  EXPECT_EQ(read_manifest(dir / "manifest.json"), entries);

  const auto loaded = load_manifest_entry(entries[0], dir.path());
  EXPECT_EQ(loaded, val);
  EXPECT_EQ(loaded.split, Split::Val);
  EXPECT_EQ(loaded.source, "unit");
}

TEST(Manifest, MismatchedEntryIsRejected) {
  TempDir dir("manifest");
  write_features(FeatureDataset(2, {1, 2}), dir / "a.rdaf");
  EXPECT_THROW(load_manifest_entry({"a.rdaf", Split::Val, "x", 5, 2}, dir.path()), FormatError);
  testing::spit_text(dir / "bad.json", "{\"files\": 3}");
  EXPECT_THROW(read_manifest(dir / "bad.json"), FormatError);
}

}  // namespace
}  // namespace rda

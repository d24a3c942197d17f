#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rda {

/// Per-vector tag. Values are the on-disk byte codes.
enum class Label : std::uint8_t {
  Id = 0,
  Ood = 1,
  Unlabeled = 255,
};

enum class Split {
  Train,
  Val,
  Test,
  Unspecified,
};

std::string_view to_string(Label label) noexcept;
std::string_view to_string(Split split) noexcept;
std::optional<Split> parse_split(std::string_view text) noexcept;

/// Row-major collection of equal-length float feature vectors with optional
/// ID/OOD labels.
///
/// When any label is present every row carries one (rows without a tag hold
/// Label::Unlabeled). `split` and `source` are metadata carried by the
/// manifest, not by the binary file, and do not take part in equality.
class FeatureDataset {
 public:
  FeatureDataset() = default;
  explicit FeatureDataset(std::size_t dim);
  FeatureDataset(std::size_t dim, std::vector<float> values, std::vector<Label> labels = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const float> row(std::size_t index) const;
  std::span<const float> values() const noexcept { return values_; }

  bool has_labels() const noexcept { return !labels_.empty(); }
  std::span<const Label> labels() const noexcept { return labels_; }
  /// Label of row `index`; Label::Unlabeled when the dataset carries none.
  Label label(std::size_t index) const;

  void push_back(std::span<const float> vector, std::optional<Label> label = std::nullopt);

  /// Subset containing the given rows in the given order. Metadata is copied.
  FeatureDataset select(std::span<const std::size_t> rows) const;

  /// Throws InputError if an invariant is violated: zero dimension, non-finite
  /// entries, label count mismatch, or OOD rows in a train split.
  void validate() const;

  Split split = Split::Unspecified;
  std::string source;

  friend bool operator==(const FeatureDataset& a, const FeatureDataset& b) noexcept;

 private:
  std::size_t dim_ = 0;
  std::vector<float> values_;
  std::vector<Label> labels_;
};

/// Feature file layout (little-endian):
///   "RDAF" | u32 version | u32 count | u32 dim | count*dim f32 | [count u8 labels]
/// The low 24 bits of version hold the format revision (1); bit 31 flags the
/// label section.
inline constexpr char kFeatureMagic[4] = {'R', 'D', 'A', 'F'};
inline constexpr std::uint32_t kFeatureFormatRevision = 1;
inline constexpr std::uint32_t kFeatureLabelsFlag = 1u << 31;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

std::vector<std::uint8_t> encode_features(const FeatureDataset& dataset);
FeatureDataset decode_features(std::span<const std::uint8_t> bytes);

/// Returns the number of bytes written.
std::size_t write_features(const FeatureDataset& dataset, const std::filesystem::path& destination);
FeatureDataset read_features(const std::filesystem::path& source);

struct ManifestEntry {
  std::string path;
  Split split = Split::Unspecified;
  std::string source;
  std::size_t count = 0;
  std::size_t dim = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& destination);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& source);

/// Reads the file named by `entry` (relative paths resolve against
/// `base_dir`) and attaches the entry's split/source.
FeatureDataset load_manifest_entry(const ManifestEntry& entry, const std::filesystem::path& base_dir);

}  // namespace rda

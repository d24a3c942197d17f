#include "rda/feature_io.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "binary_io.hpp"
#include "json.hpp"
#include "rda/errors.hpp"

namespace rda {

using nlohmann::json;

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::Id: return "ID";
    case Label::Ood: return "OOD";
    case Label::Unlabeled: return "unlabeled";
  }
  return "invalid";
}

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    case Split::Unspecified: return "unspecified";
  }
  return "unspecified";
}

std::optional<Split> parse_split(std::string_view text) noexcept {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  if (text == "unspecified") return Split::Unspecified;
  return std::nullopt;
}

FeatureDataset::FeatureDataset(std::size_t dim) : dim_(dim) {}

FeatureDataset::FeatureDataset(std::size_t dim, std::vector<float> values, std::vector<Label> labels)
    : dim_(dim), values_(std::move(values)), labels_(std::move(labels)) {
  if (dim_ == 0) throw InputError("feature dimension must be at least 1");
  if (values_.size() % dim_ != 0) {
    throw InputError("value count " + std::to_string(values_.size()) + " is not a multiple of dimension " +
                     std::to_string(dim_));
  }
  if (!labels_.empty() && labels_.size() != size()) {
    throw InputError("label count " + std::to_string(labels_.size()) + " does not match vector count " +
                     std::to_string(size()));
  }
}

std::span<const float> FeatureDataset::row(std::size_t index) const {
  if (index >= size()) throw InputError("row " + std::to_string(index) + " out of range");
  return std::span<const float>(values_).subspan(index * dim_, dim_);
}

Label FeatureDataset::label(std::size_t index) const {
  if (index >= size()) throw InputError("row " + std::to_string(index) + " out of range");
  return labels_.empty() ? Label::Unlabeled : labels_[index];
}

void FeatureDataset::push_back(std::span<const float> vector, std::optional<Label> label) {
  if (dim_ == 0) throw InputError("feature dimension must be at least 1");
  if (vector.size() != dim_) {
    throw InputError("vector of length " + std::to_string(vector.size()) + " pushed into dataset of dimension " +
                     std::to_string(dim_));
  }
  if (label && labels_.empty()) labels_.assign(size(), Label::Unlabeled);
  values_.insert(values_.end(), vector.begin(), vector.end());
  if (!labels_.empty()) labels_.push_back(label.value_or(Label::Unlabeled));
}

FeatureDataset FeatureDataset::select(std::span<const std::size_t> rows) const {
  FeatureDataset out(dim_);
  out.values_.reserve(rows.size() * dim_);
  for (std::size_t r : rows) {
    auto v = row(r);
    out.values_.insert(out.values_.end(), v.begin(), v.end());
    if (has_labels()) out.labels_.push_back(labels_[r]);
  }
  out.split = split;
  out.source = source;
  return out;
}

void FeatureDataset::validate() const {
  if (dim_ == 0) throw InputError("feature dimension must be at least 1");
  if (values_.size() % dim_ != 0) throw InputError("ragged feature storage");
  if (!labels_.empty() && labels_.size() != size()) throw InputError("label count does not match vector count");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InputError("non-finite entry at vector " + std::to_string(i / dim_) + ", coordinate " +
                       std::to_string(i % dim_));
    }
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const auto code = static_cast<std::uint8_t>(labels_[i]);
    if (code != 0 && code != 1 && code != 255) {
      throw InputError("invalid label code " + std::to_string(code) + " at vector " + std::to_string(i));
    }
    if (split == Split::Train && labels_[i] == Label::Ood) {
      throw InputError("train split contains an OOD vector at index " + std::to_string(i));
    }
  }
}

bool operator==(const FeatureDataset& a, const FeatureDataset& b) noexcept {
  if (a.dim_ != b.dim_ || a.values_.size() != b.values_.size() || a.labels_ != b.labels_) return false;
  return a.values_.empty() ||
         std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(float)) == 0;
}

std::vector<std::uint8_t> encode_features(const FeatureDataset& dataset) {
  dataset.validate();
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (dataset.size() > kMax || dataset.dim() > kMax) {
    throw InputError("dataset too large for the u32 header fields");
  }
  detail::ByteWriter w;
  w.bytes(kFeatureMagic, 4);
  w.u32(kFeatureFormatRevision | (dataset.has_labels() ? kFeatureLabelsFlag : 0u));
  w.u32(static_cast<std::uint32_t>(dataset.size()));
  w.u32(static_cast<std::uint32_t>(dataset.dim()));
  w.f32s(dataset.values());
  for (Label l : dataset.labels()) w.u8(static_cast<std::uint8_t>(l));
  return w.take();
}

FeatureDataset decode_features(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kFeatureMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::MagicMismatch,
                      "expected \"RDAF\", found \"" + std::string(magic, 4) + "\"");
  }
  const std::uint32_t version = r.u32("version");
  const std::uint32_t revision = version & 0x00FFFFFFu;
  const std::uint32_t flags = version & 0xFF000000u;
  if (revision != kFeatureFormatRevision) {
    throw FormatError(FormatErrorKind::BadVersion, "unsupported format revision " + std::to_string(revision));
  }
  if ((flags & ~kFeatureLabelsFlag) != 0) {
    throw FormatError(FormatErrorKind::BadVersion, "unknown flag bits in version field");
  }
  const bool has_labels = (flags & kFeatureLabelsFlag) != 0;
  const std::uint32_t count = r.u32("vector count");
  const std::uint32_t dim = r.u32("dimension");
  if (dim == 0) throw FormatError(FormatErrorKind::BadHeader, "dimension is zero");

  const std::uint64_t n_values = std::uint64_t{count} * dim;
  const std::uint64_t expected = n_values * sizeof(float) + (has_labels ? count : 0);
  if (r.remaining() < expected) {
    throw FormatError(FormatErrorKind::Truncated,
                      "header declares " + std::to_string(count) + " vectors of dimension " + std::to_string(dim) +
                          " (" + std::to_string(expected) + " payload bytes) but only " +
                          std::to_string(r.remaining()) + " remain");
  }
  if (r.remaining() > expected) {
    throw FormatError(FormatErrorKind::TrailingData,
                      std::to_string(r.remaining() - expected) + " unexpected bytes after payload");
  }

  std::vector<float> values(n_values);
  r.f32s(values, "feature payload");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw FormatError(FormatErrorKind::NonFinite, "vector " + std::to_string(i / dim) + ", coordinate " +
                                                        std::to_string(i % dim) + " is not finite");
    }
  }
  std::vector<Label> labels;
  if (has_labels) {
    labels.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint8_t code = r.u8("label");
      if (code != 0 && code != 1 && code != 255) {
        throw FormatError(FormatErrorKind::BadLabel,
                          "label byte " + std::to_string(code) + " at vector " + std::to_string(i));
      }
      labels[i] = static_cast<Label>(code);
    }
  }
  return FeatureDataset(dim, std::move(values), std::move(labels));
}

std::size_t write_features(const FeatureDataset& dataset, const std::filesystem::path& destination) {
  const auto bytes = encode_features(dataset);
  detail::write_file(destination, bytes);
  return bytes.size();
}

FeatureDataset read_features(const std::filesystem::path& source) {
  auto dataset = decode_features(detail::read_file(source));
  dataset.source = source.string();
  return dataset;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& destination) {
  json files = json::array();
  for (const auto& e : entries) {
    files.push_back({{"path", e.path},
                     {"split", std::string(to_string(e.split))},
                     {"source", e.source},
                     {"count", e.count},
                     {"dim", e.dim}});
  }
  json doc = {{"files", files}};
  detail::write_text_file(destination, doc.dump(2) + "\n");
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& source) {
  json doc;
  try {
    doc = json::parse(detail::read_text_file(source));
  } catch (const json::parse_error& e) {
    throw FormatError(FormatErrorKind::BadDocument, source.string() + ": " + e.what());
  }
  std::vector<ManifestEntry> entries;
  try {
    for (const auto& f : doc.at("files")) {
      ManifestEntry e;
      e.path = f.at("path").get<std::string>();
      auto split = parse_split(f.at("split").get<std::string>());
      if (!split) throw FormatError(FormatErrorKind::BadDocument, "unknown split in " + source.string());
      e.split = *split;
      e.source = f.value("source", std::string{});
      e.count = f.at("count").get<std::size_t>();
      e.dim = f.at("dim").get<std::size_t>();
      entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::BadDocument, source.string() + ": " + e.what());
  }
  return entries;
}

FeatureDataset load_manifest_entry(const ManifestEntry& entry, const std::filesystem::path& base_dir) {
  std::filesystem::path p(entry.path);
  if (p.is_relative()) p = base_dir / p;
  auto dataset = read_features(p);
  if (dataset.size() != entry.count || dataset.dim() != entry.dim) {
    throw FormatError(FormatErrorKind::InconsistentDims,
                      p.string() + " holds " + std::to_string(dataset.size()) + "x" + std::to_string(dataset.dim()) +
                          " but the manifest lists " + std::to_string(entry.count) + "x" +
                          std::to_string(entry.dim));
  }
  dataset.split = entry.split;
  dataset.source = entry.source;
  return dataset;
}

}  // namespace rda

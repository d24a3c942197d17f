#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>

#include "rda/feature_io.hpp"

namespace rda {

/// N(0, scale^2 I).
struct IsotropicGaussian {
  double scale = 1.0;
};

/// Equal-weight mixture of `components` unit-`scale` Gaussians whose centres
/// are drawn once from N(0, spread^2 I).
struct GaussianMixture {
  std::size_t components = 4;
  double spread = 3.0;
  double scale = 1.0;
};

/// ID draw shifted by delta in every coordinate.
struct MeanShift {
  double delta = 2.0;
};

/// ID draw with its deviation from the component centre scaled by gamma.
struct ScaleShift {
  double gamma = 2.0;
};

/// ID draw shifted by delta along a single coordinate axis.
struct SubspaceOffset {
  std::size_t axis = 0;
  double delta = 2.0;
};

using IdKind = std::variant<IsotropicGaussian, GaussianMixture>;
using OodKind = std::variant<MeanShift, ScaleShift, SubspaceOffset>;

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;

  std::size_t total() const noexcept { return train + val + test; }
};

struct SyntheticSpec {
  std::size_t dim = 16;
  SplitCounts id{2000, 400, 800};
  SplitCounts ood{0, 200, 400};
  IdKind id_kind = IsotropicGaussian{1.0};
  OodKind ood_kind = MeanShift{2.0};
  std::uint64_t seed = 7;

  std::size_t n_id() const noexcept { return id.total(); }
  std::size_t n_ood() const noexcept { return ood.total(); }

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// The default benchmark: dim 16, ID = N(0, I) with 2000/400/800
  /// train/val/test, OOD = mean shift 2.0 with 200 val / 400 test, seed 7.
  static SyntheticSpec gauss_shift_16() { return {}; }
};

struct SyntheticDataset {
  FeatureDataset train;
  FeatureDataset val;
  FeatureDataset test;
};

/// Seeded, labelled train/val/test splits. Train is ID-only; val and test rows
/// are shuffled. Each (split, class) block draws from its own stream.
SyntheticDataset generate(const SyntheticSpec& spec);

}  // namespace rda

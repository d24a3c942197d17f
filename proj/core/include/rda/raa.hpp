#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rda/diffusion.hpp"
#include "rda/feature_io.hpp"
#include "rda/rng.hpp"
#include "rda/sampler.hpp"

namespace rda {

/// Test-time residual accumulation amplification.
///
/// Starting from the anchor v_1 = v, each of `iterations` rounds perturbs the
/// current anchor with `candidates` noise draws (v_t + m * n), reconstructs
/// every candidate and measures its distance to the *original* v_1. The
/// worst-reconstructed candidate becomes the next anchor. The largest error of
/// the last round is the difficulty score.
struct RaaConfig {
  std::size_t iterations = 5;     // T
  std::size_t candidates = 3;     // s
  double noise_weight = 1.8;      // m
  double noise_mean = 0.0;
  double noise_std = 1.0;
  ReverseConfig reverse;
  /// Unset: max(noise_weight * noise_std, reverse.sigma_min).
  std::optional<double> sigma_rec;
  /// Scale the reconstruction level by sqrt(t) at round t.
  bool track_iteration = false;
  std::uint64_t seed = 0;

  void validate() const;
  double resolved_sigma_rec() const;
};

struct ScoreRecord {
  double diff = 0.0;
  std::size_t iterations = 0;
  std::size_t candidates = 0;
  /// Row-major iterations x candidates matrix of reconstruction errors.
  std::vector<double> errors;
  /// Index of the selected candidate in each round.
  std::vector<std::size_t> selected;

  double error(std::size_t t, std::size_t i) const { return errors.at(t * candidates + i); }

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

/// Throws NumericalError naming (t, i) if a reconstruction is non-finite.
template <typename Real>
ScoreRecord raa_score(const DenoiserParams<Real>& params, std::span<const Real> v, const RaaConfig& cfg, Rng& rng);

/// Uses the stream derived from (cfg.seed, sample_index).
template <typename Real>
ScoreRecord raa_score(const DenoiserParams<Real>& params, std::span<const Real> v, const RaaConfig& cfg,
                      std::uint64_t sample_index = 0);

/// Scores every row with its own stream; results do not depend on `threads`.
std::vector<ScoreRecord> score_dataset(const DenoiserParams<float>& params, const FeatureDataset& dataset,
                                       const RaaConfig& cfg, std::size_t threads = 1);

std::vector<double> diffs_of(std::span<const ScoreRecord> records);

struct ThresholdConfig {
  double thre = 0.0;
  double mu_diff = 0.0;
  double sigma_diff = 0.0;
  double coefficient = 0.001;
  std::string source_split = "val";
  bool population_std = true;
  std::size_t count = 0;
};

inline constexpr double kDefaultThresholdCoefficient = 0.001;

/// thre = mean(diffs) + coefficient * std(diffs). Throws InputError on empty
/// input.
ThresholdConfig calibrate_threshold(std::span<const double> diffs, bool population_std = true,
                                    double coefficient = kDefaultThresholdCoefficient);

/// OOD iff diff > thre.
Label classify(double diff, const ThresholdConfig& threshold);

std::string threshold_to_json(const ThresholdConfig& threshold);
ThresholdConfig threshold_from_json(const std::string& text);
void write_threshold(const ThresholdConfig& threshold, const std::filesystem::path& destination);
ThresholdConfig read_threshold(const std::filesystem::path& source);

/// One JSON object per line: {index, diff, label?, selected_indices, errors}.
/// `labels` may be empty; Label::Unlabeled entries omit the key.
void write_score_dump(std::ostream& out, std::span<const ScoreRecord> records, std::span<const Label> labels = {});
void write_score_dump(const std::filesystem::path& destination, std::span<const ScoreRecord> records,
                      std::span<const Label> labels = {});

struct ScoreDumpEntry {
  std::size_t index = 0;
  ScoreRecord record;
  Label label = Label::Unlabeled;
};

std::vector<ScoreDumpEntry> read_score_dump(const std::filesystem::path& source);

}  // namespace rda

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rda/feature_io.hpp"
#include "rda/numerics/adamw.hpp"
#include "rda/numerics/mlp.hpp"
#include "rda/rng.hpp"

namespace rda {

struct Preconditioning {
  double sigma_data = 1.0;

  friend bool operator==(const Preconditioning&, const Preconditioning&) = default;
};

struct PreconditionCoeffs {
  double skip = 0.0;
  double out = 0.0;
  double in = 0.0;
  double noise = 0.0;
};

/// c_skip = sd^2/(s^2+sd^2), c_out = s*sd/sqrt(s^2+sd^2),
/// c_in = 1/sqrt(s^2+sd^2), c_noise = ln(s)/4.
/// Throws DomainError unless sigma > 0 and sigma_data > 0.
PreconditionCoeffs precondition_coeffs(double sigma, const Preconditioning& precond);

/// ln(sigma) ~ N(p_mean, p_std^2).
struct NoiseLevelSampler {
  double p_mean = -0.05;
  double p_std = 1.5;

  void validate() const;
  /// exp(p_mean + p_std * z).
  double from_standard_normal(double z) const;
};

double sample_noise_level(const NoiseLevelSampler& sampler, Rng& rng);

/// Hidden widths and activation of the conditioned network F.
struct ArchitectureConfig {
  /// Empty selects the default encoder-decoder widths for the feature dim.
  std::vector<std::size_t> hidden;
  Activation hidden_activation = Activation::Silu;
};

/// l/2, l/4, l/2 (each at least 1).
std::vector<std::size_t> default_hidden_widths(std::size_t feature_dim);

/// F takes the feature scaled by c_in plus one extra coordinate holding
/// c_noise(sigma), and returns a feature-sized correction.
template <typename Real>
struct DenoiserParams {
  Mlp<Real> net;
  Preconditioning precond;

  std::size_t feature_dim() const noexcept { return net.output_dim(); }
  /// Throws InputError if the net does not map dim+1 -> dim or sigma_data <= 0.
  void validate() const;

  template <typename Other>
  DenoiserParams<Other> cast() const {
    return {net.template cast<Other>(), precond};
  }

  friend bool operator==(const DenoiserParams&, const DenoiserParams&) = default;
};

template <typename Real>
DenoiserParams<Real> make_denoiser(std::size_t feature_dim, const ArchitectureConfig& arch, double sigma_data,
                                   std::uint64_t seed);

/// c_skip(sigma) x + c_out(sigma) F([c_in(sigma) x, c_noise(sigma)]).
template <typename Real>
std::vector<Real> denoise(const DenoiserParams<Real>& params, std::span<const Real> x_noisy, double sigma);

enum class LossWeighting {
  /// lambda(sigma) ||D - v||^2 with lambda = (sigma^2 + sd^2) / (sigma sd)^2.
  EdmWeighted,
  /// Unweighted, unsquared ||D - v||_2.
  PlainL2,
};

std::string_view to_string(LossWeighting w) noexcept;
LossWeighting parse_loss_weighting(std::string_view name);

/// Noise realisation for one training sample: sigma and the unit-variance
/// direction z, so that eps = sigma * z.
struct NoiseDraw {
  double sigma = 1.0;
  std::vector<double> z;
};

template <typename Real>
struct LossResult {
  double loss = 0.0;
  MlpGradients<Real> grads;
};

/// Batch-mean loss and its parameter gradients for fixed noise draws.
/// Throws NumericalError reporting sigma when a term is not finite.
template <typename Real>
LossResult<Real> training_loss(const DenoiserParams<Real>& params, std::span<const std::span<const Real>> batch,
                               std::span<const NoiseDraw> draws, LossWeighting weighting);

/// Draws (sigma, z) per sample from `sampler` and `rng` in batch order, then
/// evaluates the loss as above.
template <typename Real>
LossResult<Real> training_loss(const DenoiserParams<Real>& params, std::span<const std::span<const Real>> batch,
                               const NoiseLevelSampler& sampler, Rng& rng, LossWeighting weighting);

enum class LrSchedule {
  Constant,
  Cosine,
};

std::string_view to_string(LrSchedule s) noexcept;
LrSchedule parse_lr_schedule(std::string_view name);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
  LossWeighting loss_weighting = LossWeighting::EdmWeighted;
  LrSchedule lr_schedule = LrSchedule::Constant;
  /// Unset: estimated from the training data.
  std::optional<double> sigma_data;
  ArchitectureConfig arch;

  void validate() const;
  AdamWHyperparams optimizer() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
};

/// Pooled per-coordinate population std of the rows:
/// sqrt(mean_j var_j). Returns 1 for degenerate data (no spread).
double estimate_sigma_data(const FeatureDataset& dataset);

/// Fits the denoiser on an ID-only training split. Deterministic given
/// (dataset, cfg, sampler). `on_epoch` receives each epoch's mean loss.
/// Throws InputError on an empty or mislabeled dataset and NumericalError
/// (with epoch and batch index) on a non-finite loss.
template <typename Real>
DenoiserParams<Real> train(const FeatureDataset& dataset, const TrainConfig& cfg, const NoiseLevelSampler& sampler,
                           const std::function<void(const EpochStats&)>& on_epoch = {});

extern template struct DenoiserParams<float>;
extern template struct DenoiserParams<double>;

}  // namespace rda

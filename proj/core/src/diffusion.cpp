#include "rda/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <type_traits>

#include "rda/errors.hpp"

namespace rda {

PreconditionCoeffs precondition_coeffs(double sigma, const Preconditioning& precond) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("noise level must be positive and finite, got " + std::to_string(sigma));
  }
  const double sd = precond.sigma_data;
  if (!(sd > 0.0) || !std::isfinite(sd)) throw DomainError("sigma_data must be positive and finite");
  const double total = sigma * sigma + sd * sd;
  const double root = std::sqrt(total);
  return {sd * sd / total, sigma * sd / root, 1.0 / root, std::log(sigma) / 4.0};
}

void NoiseLevelSampler::validate() const {
  if (!std::isfinite(p_mean)) throw ConfigError("p_mean must be finite", "noise.p_mean");
  if (!(p_std >= 0.0) || !std::isfinite(p_std)) throw ConfigError("p_std must be non-negative", "noise.p_std");
}

double NoiseLevelSampler::from_standard_normal(double z) const { return std::exp(p_mean + p_std * z); }

double sample_noise_level(const NoiseLevelSampler& sampler, Rng& rng) {
  return sampler.from_standard_normal(standard_normal(rng));
}

std::vector<std::size_t> default_hidden_widths(std::size_t feature_dim) {
  const std::size_t half = std::max<std::size_t>(1, feature_dim / 2);
  const std::size_t quarter = std::max<std::size_t>(1, feature_dim / 4);
  return {half, quarter, half};
}

template <typename Real>
void DenoiserParams<Real>::validate() const {
  if (net.layers().empty()) throw InputError("denoiser network is empty");
  if (net.input_dim() != net.output_dim() + 1) {
    throw InputError("denoiser network maps " + std::to_string(net.input_dim()) + " -> " +
                     std::to_string(net.output_dim()) + "; expected feature_dim + 1 -> feature_dim");
  }
  if (!(precond.sigma_data > 0.0) || !std::isfinite(precond.sigma_data)) {
    throw InputError("sigma_data must be positive and finite");
  }
}

template <typename Real>
DenoiserParams<Real> make_denoiser(std::size_t feature_dim, const ArchitectureConfig& arch, double sigma_data,
                                   std::uint64_t seed) {
  if (feature_dim == 0) throw InputError("feature dimension must be at least 1");
  std::vector<std::size_t> widths{feature_dim + 1};
  const auto hidden = arch.hidden.empty() ? default_hidden_widths(feature_dim) : arch.hidden;
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(feature_dim);
  DenoiserParams<Real> params{
      Mlp<Real>::initialized(widths, arch.hidden_activation, Activation::Identity, seed),
      Preconditioning{sigma_data}};
  params.validate();
  return params;
}

namespace {

template <typename Real>
void check_feature(const DenoiserParams<Real>& params, std::size_t got) {
  if (got != params.feature_dim()) {
    throw InputError("feature of length " + std::to_string(got) + " given to a denoiser of dimension " +
                     std::to_string(params.feature_dim()));
  }
}

template <typename Real>
std::vector<Real> network_input(std::span<const Real> x, const PreconditionCoeffs& c) {
  std::vector<Real> u(x.size() + 1);
  for (std::size_t j = 0; j < x.size(); ++j) u[j] = static_cast<Real>(c.in) * x[j];
  u.back() = static_cast<Real>(c.noise);
  return u;
}

}  // namespace

template <typename Real>
std::vector<Real> denoise(const DenoiserParams<Real>& params, std::span<const Real> x_noisy, double sigma) {
  check_feature(params, x_noisy.size());
  const auto c = precondition_coeffs(sigma, params.precond);
  const auto f = params.net.forward(network_input<Real>(x_noisy, c));
  std::vector<Real> out(x_noisy.size());
  const auto skip = static_cast<Real>(c.skip);
  const auto scale = static_cast<Real>(c.out);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = skip * x_noisy[j] + scale * f[j];
  return out;
}

std::string_view to_string(LossWeighting w) noexcept {
  return w == LossWeighting::EdmWeighted ? "edm_weighted" : "plain_l2";
}

LossWeighting parse_loss_weighting(std::string_view name) {
  if (name == "edm_weighted") return LossWeighting::EdmWeighted;
  if (name == "plain_l2") return LossWeighting::PlainL2;
  throw ConfigError("unknown loss weighting \"" + std::string(name) + "\"", "train.loss_weighting");
}

template <typename Real>
LossResult<Real> training_loss(const DenoiserParams<Real>& params, std::span<const std::span<const Real>> batch,
                               std::span<const NoiseDraw> draws, LossWeighting weighting) {
  if (batch.empty()) throw InputError("training batch is empty");
  if (draws.size() != batch.size()) throw InputError("one noise draw per batch sample is required");
  const std::size_t dim = params.feature_dim();
  const double sd = params.precond.sigma_data;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  LossResult<Real> result;
  result.grads = MlpGradients<Real>::zeros_like(params.net);
  MlpTape<Real> tape;
  std::vector<Real> noisy(dim);
  std::vector<Real> upstream(dim);

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto v = batch[b];
    const auto& draw = draws[b];
    check_feature(params, v.size());
    if (draw.z.size() != dim) throw InputError("noise draw has the wrong dimension");
    const double sigma = draw.sigma;
    const auto c = precondition_coeffs(sigma, params.precond);

    for (std::size_t j = 0; j < dim; ++j) noisy[j] = v[j] + static_cast<Real>(sigma * draw.z[j]);
    params.net.forward(network_input<Real>(noisy, c), tape);

    // residual r = D(y) - v
    double sq = 0.0;
    std::vector<double> residual(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = c.skip * static_cast<double>(noisy[j]) + c.out * static_cast<double>(tape.output[j]);
      residual[j] = d - static_cast<double>(v[j]);
      sq += residual[j] * residual[j];
    }

    double term = 0.0;
    double dterm_dr = 0.0;  // d term / d r_j = dterm_dr * r_j
    if (weighting == LossWeighting::EdmWeighted) {
      const double lambda = (sigma * sigma + sd * sd) / ((sigma * sd) * (sigma * sd));
      term = lambda * sq;
      dterm_dr = 2.0 * lambda;
    } else {
      const double norm = std::sqrt(sq);
      term = norm;
      dterm_dr = norm > 0.0 ? 1.0 / norm : 0.0;
    }
    if (!std::isfinite(term)) {
      std::ostringstream msg;
      msg << "non-finite loss term at batch position " << b << " (sigma = " << sigma << ")";
      throw NumericalError(msg.str());
    }
    result.loss += term * inv_batch;

    for (std::size_t j = 0; j < dim; ++j) {
      upstream[j] = static_cast<Real>(inv_batch * dterm_dr * c.out * residual[j]);
    }
    params.net.backward(tape, upstream, result.grads);
  }
  return result;
}

template <typename Real>
LossResult<Real> training_loss(const DenoiserParams<Real>& params, std::span<const std::span<const Real>> batch,
                               const NoiseLevelSampler& sampler, Rng& rng, LossWeighting weighting) {
  std::vector<NoiseDraw> draws(batch.size());
  for (auto& d : draws) {
    d.sigma = sample_noise_level(sampler, rng);
    d.z.resize(params.feature_dim());
    for (auto& z : d.z) z = standard_normal(rng);
  }
  return training_loss(params, batch, std::span<const NoiseDraw>(draws), weighting);
}

std::string_view to_string(LrSchedule s) noexcept { return s == LrSchedule::Constant ? "constant" : "cosine"; }

LrSchedule parse_lr_schedule(std::string_view name) {
  if (name == "constant") return LrSchedule::Constant;
  if (name == "cosine") return LrSchedule::Cosine;
  throw ConfigError("unknown learning-rate schedule \"" + std::string(name) + "\"", "train.lr_schedule");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive", "train.batch_size");
  optimizer().validate();
  if (sigma_data && (!(*sigma_data > 0.0) || !std::isfinite(*sigma_data))) {
    throw ConfigError("sigma_data must be positive", "model.sigma_data");
  }
  for (std::size_t w : arch.hidden) {
    if (w == 0) throw ConfigError("hidden widths must be positive", "model.hidden");
  }
}

AdamWHyperparams TrainConfig::optimizer() const {
  return {learning_rate, beta1, beta2, epsilon, weight_decay};
}

double estimate_sigma_data(const FeatureDataset& dataset) {
  const std::size_t n = dataset.size();
  const std::size_t dim = dataset.dim();
  if (n == 0) throw InputError("cannot estimate sigma_data from an empty dataset");
  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = dataset.row(i);
    for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  double pooled = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = dataset.row(i);
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = row[j] - mean[j];
      pooled += d * d;
    }
  }
  pooled /= static_cast<double>(n * dim);
  const double sd = std::sqrt(pooled);
  return sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
}

template <typename Real>
DenoiserParams<Real> train(const FeatureDataset& dataset, const TrainConfig& cfg, const NoiseLevelSampler& sampler,
                           const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.validate();
  sampler.validate();
  if (dataset.split != Split::Train && dataset.split != Split::Unspecified) {
    throw InputError("denoiser training requires the train split, got " + std::string(to_string(dataset.split)));
  }
  if (dataset.empty()) throw InputError("training dataset is empty");
  for (Label l : dataset.labels()) {
    if (l == Label::Ood) throw InputError("training dataset contains OOD-labeled vectors");
  }
  dataset.validate();

  double sigma_data = cfg.sigma_data.value_or(estimate_sigma_data(dataset));
  // Checkpoints store sigma_data as f32; keep the in-memory model identical.
  if constexpr (std::is_same_v<Real, float>) sigma_data = static_cast<float>(sigma_data);
  Rng init_rng = make_stream(cfg.seed, 0);
  Rng shuffle_rng = make_stream(cfg.seed, 1);
  Rng noise_rng = make_stream(cfg.seed, 2);

  auto params = make_denoiser<Real>(dataset.dim(), cfg.arch, sigma_data, init_rng());
  auto state = OptimizerState<Real>::for_model(cfg.optimizer(), params.net);

  const std::size_t n = dataset.size();
  const std::size_t dim = dataset.dim();
  const std::vector<Real> values(dataset.values().begin(), dataset.values().end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const double total_steps = static_cast<double>(batches_per_epoch * cfg.epochs);
  std::size_t step = 0;
  std::vector<std::span<const Real>> batch;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      batch.clear();
      for (std::size_t k = begin; k < end; ++k) {
        batch.emplace_back(values.data() + order[k] * dim, dim);
      }

      double lr = cfg.learning_rate;
      if (cfg.lr_schedule == LrSchedule::Cosine) {
        lr = cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / total_steps));
      }
      try {
        auto result = training_loss<Real>(params, batch, sampler, noise_rng, cfg.loss_weighting);
        adamw_step(params.net, result.grads, state, lr);
        epoch_loss += result.loss * static_cast<double>(end - begin);
      } catch (const NumericalError& e) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) +
                             ": " + e.what());
      }
      ++step;
    }
    if (!params.net.all_finite()) {
      throw NumericalError("non-finite parameters after epoch " + std::to_string(epoch));
    }
    if (on_epoch) on_epoch({epoch, epoch_loss / static_cast<double>(n)});
  }
  return params;
}

template struct DenoiserParams<float>;
template struct DenoiserParams<double>;
template DenoiserParams<float> make_denoiser(std::size_t, const ArchitectureConfig&, double, std::uint64_t);
template DenoiserParams<double> make_denoiser(std::size_t, const ArchitectureConfig&, double, std::uint64_t);
template std::vector<float> denoise(const DenoiserParams<float>&, std::span<const float>, double);
template std::vector<double> denoise(const DenoiserParams<double>&, std::span<const double>, double);
template LossResult<float> training_loss(const DenoiserParams<float>&, std::span<const std::span<const float>>,
                                         std::span<const NoiseDraw>, LossWeighting);
template LossResult<double> training_loss(const DenoiserParams<double>&, std::span<const std::span<const double>>,
                                          std::span<const NoiseDraw>, LossWeighting);
template LossResult<float> training_loss(const DenoiserParams<float>&, std::span<const std::span<const float>>,
                                         const NoiseLevelSampler&, Rng&, LossWeighting);
template LossResult<double> training_loss(const DenoiserParams<double>&, std::span<const std::span<const double>>,
                                          const NoiseLevelSampler&, Rng&, LossWeighting);
template DenoiserParams<float> train(const FeatureDataset&, const TrainConfig&, const NoiseLevelSampler&,
                                     const std::function<void(const EpochStats&)>&);
template DenoiserParams<double> train(const FeatureDataset&, const TrainConfig&, const NoiseLevelSampler&,
                                      const std::function<void(const EpochStats&)>&);

}  // namespace rda

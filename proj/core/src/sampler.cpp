#include "rda/sampler.hpp"

#include <cmath>

#include "rda/errors.hpp"

namespace rda {

std::string_view to_string(ReverseMode m) noexcept {
  switch (m) {
    case ReverseMode::SingleStep: return "single_step";
    case ReverseMode::LangevinDenoiser: return "langevin_denoiser";
    case ReverseMode::LangevinScore: return "langevin_score";
  }
  return "single_step";
}

ReverseMode parse_reverse_mode(std::string_view name) {
  if (name == "single_step") return ReverseMode::SingleStep;
  if (name == "langevin_denoiser") return ReverseMode::LangevinDenoiser;
  if (name == "langevin_score") return ReverseMode::LangevinScore;
  throw ConfigError("unknown reverse mode \"" + std::string(name) + "\"", "reverse.mode");
}

std::string_view to_string(ScheduleKind k) noexcept {
  switch (k) {
    case ScheduleKind::Geometric: return "geometric";
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::Explicit: return "explicit";
  }
  return "geometric";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "geometric") return ScheduleKind::Geometric;
  if (name == "constant") return ScheduleKind::Constant;
  if (name == "explicit") return ScheduleKind::Explicit;
  throw ConfigError("unknown schedule \"" + std::string(name) + "\"", "reverse.schedule");
}

void ReverseConfig::validate() const {
  if (steps == 0) throw ConfigError("steps must be positive", "reverse.steps");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw ConfigError("step_size must be positive", "reverse.step_size");
  }
  if (!(sigma_min > 0.0)) throw ConfigError("sigma_min must be positive", "reverse.sigma_min");
  if (!(sigma_max > sigma_min) || !std::isfinite(sigma_max)) {
    throw ConfigError("sigma_max must exceed sigma_min", "reverse.sigma_max");
  }
  if (schedule == ScheduleKind::Explicit) {
    if (sigma_schedule.empty()) throw ConfigError("explicit schedule is empty", "reverse.sigma_schedule");
    if (sigma_schedule.size() != steps) {
      throw ConfigError("steps must equal the schedule length", "reverse.sigma_schedule");
    }
    for (std::size_t i = 0; i < sigma_schedule.size(); ++i) {
      if (!(sigma_schedule[i] > 0.0) || !std::isfinite(sigma_schedule[i])) {
        throw ConfigError("schedule entries must be positive", "reverse.sigma_schedule");
      }
      if (i > 0 && !(sigma_schedule[i] < sigma_schedule[i - 1])) {
        throw ConfigError("schedule must be strictly decreasing", "reverse.sigma_schedule");
      }
    }
  }
}

std::vector<double> ReverseConfig::resolved_schedule(double sigma_rec) const {
  switch (schedule) {
    case ScheduleKind::Explicit: return sigma_schedule;
    case ScheduleKind::Constant: return std::vector<double>(steps, sigma_rec);
    case ScheduleKind::Geometric: {
      std::vector<double> out(steps);
      if (steps == 1) {
        out[0] = sigma_max;
        return out;
      }
      const double lo = std::log(sigma_min);
      const double hi = std::log(sigma_max);
      for (std::size_t i = 0; i < steps; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(steps - 1);
        out[i] = std::exp(hi + (lo - hi) * frac);
      }
      out.front() = sigma_max;
      out.back() = sigma_min;
      return out;
    }
  }
  return {};
}

template <typename Real>
std::vector<Real> reconstruct(const DenoiserParams<Real>& params, std::span<const Real> x, const ReverseConfig& cfg,
                              double sigma_rec, Rng& rng) {
  if (!(sigma_rec > 0.0) || !std::isfinite(sigma_rec)) {
    throw DomainError("reconstruction noise level must be positive, got " + std::to_string(sigma_rec));
  }
  cfg.validate();
  if (cfg.mode == ReverseMode::SingleStep) return denoise(params, x, sigma_rec);

  std::vector<Real> v(x.begin(), x.end());
  const double half_eps = 0.5 * cfg.step_size;
  const double noise_scale = std::sqrt(cfg.step_size);
  for (double sigma : cfg.resolved_schedule(sigma_rec)) {
    const auto d = denoise(params, std::span<const Real>(v), sigma);
    const double inv_var = 1.0 / (sigma * sigma);
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double drift = cfg.mode == ReverseMode::LangevinDenoiser
                               ? static_cast<double>(d[j])
                               : (static_cast<double>(d[j]) - static_cast<double>(v[j])) * inv_var;
      const double z = cfg.stochastic ? standard_normal(rng) : 0.0;
      v[j] = static_cast<Real>(static_cast<double>(v[j]) + half_eps * drift + noise_scale * z);
    }
  }
  return v;
}

template <typename Real>
std::vector<Real> reconstruct(const DenoiserParams<Real>& params, std::span<const Real> x, const ReverseConfig& cfg,
                              double sigma_rec) {
  Rng rng = make_stream(cfg.seed, 0);
  return reconstruct(params, x, cfg, sigma_rec, rng);
}

template std::vector<float> reconstruct(const DenoiserParams<float>&, std::span<const float>, const ReverseConfig&,
                                        double, Rng&);
template std::vector<double> reconstruct(const DenoiserParams<double>&, std::span<const double>,
                                         const ReverseConfig&, double, Rng&);
template std::vector<float> reconstruct(const DenoiserParams<float>&, std::span<const float>, const ReverseConfig&,
                                        double);
template std::vector<double> reconstruct(const DenoiserParams<double>&, std::span<const double>,
                                         const ReverseConfig&, double);

}  // namespace rda

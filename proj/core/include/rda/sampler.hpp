#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rda/diffusion.hpp"
#include "rda/rng.hpp"

namespace rda {

enum class ReverseMode {
  /// One denoiser application at the reconstruction noise level.
  SingleStep,
  /// v <- v + (eps/2) D(v, sigma_t) + sqrt(eps) z_t
  LangevinDenoiser,
  /// v <- v + (eps/2) (D(v, sigma_t) - v) / sigma_t^2 + sqrt(eps) z_t
  LangevinScore,
};

enum class ScheduleKind {
  /// sigma_max -> sigma_min, log-uniformly spaced over `steps`.
  Geometric,
  /// The reconstruction noise level at every step.
  Constant,
  /// `sigma_schedule` as given.
  Explicit,
};

std::string_view to_string(ReverseMode m) noexcept;
ReverseMode parse_reverse_mode(std::string_view name);
std::string_view to_string(ScheduleKind k) noexcept;
ScheduleKind parse_schedule_kind(std::string_view name);

struct ReverseConfig {
  ReverseMode mode = ReverseMode::SingleStep;
  std::size_t steps = 1;
  double step_size = 0.05;
  ScheduleKind schedule = ScheduleKind::Geometric;
  std::vector<double> sigma_schedule;
  bool stochastic = true;
  double sigma_min = 0.002;
  double sigma_max = 80.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Noise levels for the chain steps, strictly decreasing for Geometric and
  /// Explicit schedules.
  std::vector<double> resolved_schedule(double sigma_rec) const;
};

/// Reconstruction operator used at test time. Throws DomainError when
/// sigma_rec <= 0 and InputError on dimension mismatch.
template <typename Real>
std::vector<Real> reconstruct(const DenoiserParams<Real>& params, std::span<const Real> x, const ReverseConfig& cfg,
                              double sigma_rec, Rng& rng);

/// Same, drawing chain noise from a stream seeded by cfg.seed.
template <typename Real>
std::vector<Real> reconstruct(const DenoiserParams<Real>& params, std::span<const Real> x, const ReverseConfig& cfg,
                              double sigma_rec);

}  // namespace rda

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rda/numerics/mlp.hpp"

namespace rda {

struct AdamWHyperparams {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;

  /// Throws ConfigError naming the bad field.
  void validate() const;
};

/// Decoupled-weight-decay Adam state. Moment buffers mirror the parameter
/// tensors passed to adamw_step, in the same order.
template <typename Real>
struct OptimizerState {
  AdamWHyperparams hyper;
  std::uint64_t step_count = 0;
  std::vector<std::vector<Real>> first_moment;
  std::vector<std::vector<Real>> second_moment;

  OptimizerState() = default;
  OptimizerState(AdamWHyperparams h, std::span<const std::size_t> tensor_sizes);
  static OptimizerState for_model(const AdamWHyperparams& h, const Mlp<Real>& model);
};

/// One AdamW update:
///   w <- w * (1 - lr * wd)
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   w <- w - lr * m_hat / (sqrt(v_hat) + eps)
/// `learning_rate` overrides hyper.learning_rate when positive (schedules).
/// Throws NumericalError naming the tensor if any gradient is non-finite; in
/// that case nothing is modified.
template <typename Real>
void adamw_step(std::span<const TensorView<Real>> params, std::span<const std::span<const Real>> grads,
                OptimizerState<Real>& state, double learning_rate = 0.0);

/// Convenience overload for an Mlp and its gradient buffers.
template <typename Real>
void adamw_step(Mlp<Real>& model, const MlpGradients<Real>& grads, OptimizerState<Real>& state,
                double learning_rate = 0.0);

}  // namespace rda

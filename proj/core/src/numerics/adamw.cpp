#include "rda/numerics/adamw.hpp"

#include <cmath>

#include "rda/errors.hpp"

namespace rda {

void AdamWHyperparams::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive", "learning_rate");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)", "beta1");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)", "beta2");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive", "epsilon");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("weight_decay must be non-negative", "weight_decay");
  }
}

template <typename Real>
OptimizerState<Real>::OptimizerState(AdamWHyperparams h, std::span<const std::size_t> tensor_sizes) : hyper(h) {
  hyper.validate();
  for (std::size_t n : tensor_sizes) {
    first_moment.emplace_back(n, Real(0));
    second_moment.emplace_back(n, Real(0));
  }
}

template <typename Real>
OptimizerState<Real> OptimizerState<Real>::for_model(const AdamWHyperparams& h, const Mlp<Real>& model) {
  std::vector<std::size_t> sizes;
  for (const auto& t : model.parameters()) sizes.push_back(t.values.size());
  return OptimizerState(h, sizes);
}

template <typename Real>
void adamw_step(std::span<const TensorView<Real>> params, std::span<const std::span<const Real>> grads,
                OptimizerState<Real>& state, double learning_rate) {
  const auto& h = state.hyper;
  h.validate();
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw InputError("optimizer got " + std::to_string(params.size()) + " parameter tensors, " +
                     std::to_string(grads.size()) + " gradients and " + std::to_string(state.first_moment.size()) +
                     " moment buffers");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const std::size_t n = params[k].values.size();
    if (grads[k].size() != n || state.first_moment[k].size() != n || state.second_moment[k].size() != n) {
      throw InputError("shape mismatch for tensor " + params[k].name);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(grads[k][j])) {
        throw NumericalError("non-finite gradient in tensor " + params[k].name + " at element " + std::to_string(j));
      }
    }
  }

  const double lr = learning_rate > 0.0 ? learning_rate : h.learning_rate;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(h.beta1, t);
  const double bias2 = 1.0 - std::pow(h.beta2, t);
  const double decay = 1.0 - lr * h.weight_decay;

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto w = params[k].values;
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double g = grads[k][j];
      const double mj = h.beta1 * m[j] + (1.0 - h.beta1) * g;
      const double vj = h.beta2 * v[j] + (1.0 - h.beta2) * g * g;
      m[j] = static_cast<Real>(mj);
      v[j] = static_cast<Real>(vj);
      const double m_hat = mj / bias1;
      const double v_hat = vj / bias2;
      const double updated = static_cast<double>(w[j]) * decay - lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
      w[j] = static_cast<Real>(updated);
    }
  }
}

template <typename Real>
void adamw_step(Mlp<Real>& model, const MlpGradients<Real>& grads, OptimizerState<Real>& state,
                double learning_rate) {
  auto params = model.parameters();
  std::vector<std::span<const Real>> g;
  for (std::size_t i = 0; i < grads.weights.size(); ++i) {
    g.emplace_back(grads.weights[i]);
    g.emplace_back(grads.bias[i]);
  }
  adamw_step<Real>(std::span<const TensorView<Real>>(params), std::span<const std::span<const Real>>(g), state,
                   learning_rate);
}

template struct OptimizerState<float>;
template struct OptimizerState<double>;
template void adamw_step(std::span<const TensorView<float>>, std::span<const std::span<const float>>,
                         OptimizerState<float>&, double);
template void adamw_step(std::span<const TensorView<double>>, std::span<const std::span<const double>>,
                         OptimizerState<double>&, double);
template void adamw_step(Mlp<float>&, const MlpGradients<float>&, OptimizerState<float>&, double);
template void adamw_step(Mlp<double>&, const MlpGradients<double>&, OptimizerState<double>&, double);

}  // namespace rda

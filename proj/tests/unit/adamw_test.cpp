#include <gtest/gtest.h>

#include <array>
#include <limits>

#include "rda/errors.hpp"
#include "rda/numerics/adamw.hpp"

namespace rda {
namespace {

struct OneParam {
  std::vector<double> w;
  std::vector<double> g;
  OptimizerState<double> state;

  OneParam(double w0, double g0, AdamWHyperparams h) : w{w0}, g{g0} {
    std::array<std::size_t, 1> sizes{1};
    state = OptimizerState<double>(h, sizes);
  }

  void step() {
    std::array<TensorView<double>, 1> params{TensorView<double>{"w", w}};
    std::array<std::span<const double>, 1> grads{std::span<const double>(g)};
    adamw_step<double>(params, grads, state);
  }
};

TEST(AdamW, FirstStepArithmetic) {
  OneParam p(0.0, 1.0, {2e-4, 0.9, 0.999, 1e-8, 0.0});
  p.step();
  // m_hat = v_hat = 1, so the step is lr / (1 + eps).
  EXPECT_DOUBLE_EQ(p.w[0], -2e-4 / (1.0 + 1e-8));
  EXPECT_EQ(p.state.step_count, 1u);
  EXPECT_DOUBLE_EQ(p.state.first_moment[0][0], 0.1);
  EXPECT_DOUBLE_EQ(p.state.second_moment[0][0], 0.001);
}

TEST(AdamW, ZeroGradientZeroDecayIsIdentity) {
  OneParam p(0.731, 0.0, {2e-4, 0.9, 0.999, 1e-8, 0.0});
  for (int i = 0; i < 5; ++i) p.step();
  EXPECT_EQ(p.w[0], 0.731);
  EXPECT_EQ(p.state.step_count, 5u);
}

TEST(AdamW, DecoupledDecayArithmetic) {
  OneParam p(1.0, 0.0, {2e-4, 0.9, 0.999, 1e-8, 0.01});
  p.step();
  EXPECT_DOUBLE_EQ(p.w[0], 0.999998);
}

TEST(AdamW, NonFiniteGradientNamesTensorAndLeavesParamsAlone) {
  std::array<std::size_t, 3> widths{2, 3, 2};
  auto model = Mlp<double>::initialized(widths, Activation::Silu, Activation::Identity, 1);
  const auto before = model;
  auto state = OptimizerState<double>::for_model({}, model);
  auto grads = MlpGradients<double>::zeros_like(model);
  grads.bias[1][1] = std::numeric_limits<double>::quiet_NaN();
  try {
    adamw_step(model, grads, state);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("layer1.bias"), std::string::npos) << e.what();
  }
  EXPECT_EQ(model, before);
  EXPECT_EQ(state.step_count, 0u);
}

TEST(AdamW, RejectsInvalidHyperparameters) {
  EXPECT_THROW((AdamWHyperparams{0.0, 0.9, 0.999, 1e-8, 0.0}.validate()), ConfigError);
  EXPECT_THROW((AdamWHyperparams{1e-3, 1.0, 0.999, 1e-8, 0.0}.validate()), ConfigError);
  EXPECT_THROW((AdamWHyperparams{1e-3, 0.9, -0.1, 1e-8, 0.0}.validate()), ConfigError);
}

TEST(AdamW, ShapeMismatchIsInputError) {
  std::vector<double> w{1.0, 2.0};
  std::vector<double> g{1.0};
  std::array<std::size_t, 1> sizes{2};
  OptimizerState<double> state({}, sizes);
  std::array<TensorView<double>, 1> params{TensorView<double>{"w", w}};
  std::array<std::span<const double>, 1> grads{std::span<const double>(g)};
  EXPECT_THROW(adamw_step<double>(params, grads, state), InputError);
}

TEST(AdamW, MinimisesAQuadratic) {
  // f(w) = (w - 3)^2; AdamW with a generous rate should settle near 3.
  OneParam p(0.0, 0.0, {0.05, 0.9, 0.999, 1e-8, 0.0});
  for (int i = 0; i < 2000; ++i) {
    p.g[0] = 2.0 * (p.w[0] - 3.0);
    p.step();
  }
  EXPECT_NEAR(p.w[0], 3.0, 1e-2);
}

}  // namespace
}  // namespace rda

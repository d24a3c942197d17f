#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rda {

/// Activation tags. Numeric values are the checkpoint byte codes.
enum class Activation : std::uint8_t {
  Identity = 0,
  Relu = 1,
  Silu = 2,
  Tanh = 3,
};

std::string_view to_string(Activation a) noexcept;
/// Throws ConfigError for unknown names.
Activation parse_activation(std::string_view name);
bool is_valid_activation(std::uint8_t code) noexcept;

/// y = act(W x + b) with W stored row-major, `rows` = output width.
template <typename Real>
struct DenseLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Real> weights;
  std::vector<Real> bias;
  Activation activation = Activation::Identity;
};

template <typename Real>
class Mlp;

/// Parameter-shaped gradient buffers.
template <typename Real>
struct MlpGradients {
  std::vector<std::vector<Real>> weights;
  std::vector<std::vector<Real>> bias;

  static MlpGradients zeros_like(const Mlp<Real>& model);
  void set_zero();
  void scale(Real factor);
  bool all_finite() const;
};

/// Intermediate values recorded by a forward pass for reuse in backward.
template <typename Real>
struct MlpTape {
  std::vector<std::vector<Real>> inputs;       // input to each layer
  std::vector<std::vector<Real>> preactivations;
  std::vector<Real> output;
};

/// A named view of one parameter tensor, as seen by the optimizer.
template <typename Real>
struct TensorView {
  std::string name;
  std::span<Real> values;
};

template <typename Real>
class Mlp {
 public:
  Mlp() = default;
  /// Throws InputError unless consecutive layers chain and every buffer has
  /// the declared shape.
  explicit Mlp(std::vector<DenseLayer<Real>> layers);

  /// Fully connected network through `widths` (input, hidden..., output).
  /// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static Mlp initialized(std::span<const std::size_t> widths, Activation hidden, Activation output,
                         std::uint64_t seed);

  std::size_t input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().cols; }
  std::size_t output_dim() const noexcept { return layers_.empty() ? 0 : layers_.back().rows; }
  std::size_t parameter_count() const noexcept;
  bool all_finite() const noexcept;

  const std::vector<DenseLayer<Real>>& layers() const noexcept { return layers_; }

  std::vector<Real> forward(std::span<const Real> x) const;
  void forward(std::span<const Real> x, MlpTape<Real>& tape) const;

  /// Accumulates d<upstream, f(x)>/dtheta into `grads` for the pass recorded
  /// in `tape`, and returns the gradient with respect to the input.
  std::vector<Real> backward(const MlpTape<Real>& tape, std::span<const Real> upstream,
                             MlpGradients<Real>& grads) const;

  /// Parameter tensors in a fixed order: layer0.weight, layer0.bias, ...
  std::vector<TensorView<Real>> parameters();
  std::vector<TensorView<const Real>> parameters() const;

  template <typename Other>
  Mlp<Other> cast() const {
    std::vector<DenseLayer<Other>> out;
    out.reserve(layers_.size());
    for (const auto& l : layers_) {
      out.push_back({l.rows, l.cols, std::vector<Other>(l.weights.begin(), l.weights.end()),
                     std::vector<Other>(l.bias.begin(), l.bias.end()), l.activation});
    }
    return Mlp<Other>(std::move(out));
  }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<DenseLayer<Real>> layers_;
};

template <typename Real>
struct MlpBackwardResult {
  MlpGradients<Real> grads;
  std::vector<Real> input_grad;
};

/// Gradients of <upstream, model(x)> with respect to every parameter and x.
template <typename Real>
MlpBackwardResult<Real> mlp_backward(const Mlp<Real>& model, std::span<const Real> x,
                                     std::span<const Real> upstream);

template <typename Real>
bool operator==(const DenseLayer<Real>& a, const DenseLayer<Real>& b) {
  return a.rows == b.rows && a.cols == b.cols && a.weights == b.weights && a.bias == b.bias &&
         a.activation == b.activation;
}

extern template class Mlp<float>;
extern template class Mlp<double>;
extern template struct MlpGradients<float>;
extern template struct MlpGradients<double>;

}  // namespace rda

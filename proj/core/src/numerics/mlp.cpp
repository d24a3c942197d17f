#include "rda/numerics/mlp.hpp"

#include <cmath>
#include <random>

#include "rda/errors.hpp"
#include "rda/rng.hpp"

namespace rda {

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Silu: return "silu";
    case Activation::Tanh: return "tanh";
  }
  return "invalid";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity" || name == "linear") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "silu") return Activation::Silu;
  if (name == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation \"" + std::string(name) + "\"");
}

bool is_valid_activation(std::uint8_t code) noexcept { return code <= 3; }

namespace {

template <typename Real>
Real activate(Activation a, Real z) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::Relu: return z > Real(0) ? z : Real(0);
    case Activation::Silu: return z / (Real(1) + std::exp(-z));
    case Activation::Tanh: return std::tanh(z);
  }
  return z;
}

template <typename Real>
Real activate_derivative(Activation a, Real z) {
  switch (a) {
    case Activation::Identity: return Real(1);
    case Activation::Relu: return z > Real(0) ? Real(1) : Real(0);
    case Activation::Silu: {
      const Real s = Real(1) / (Real(1) + std::exp(-z));
      return s * (Real(1) + z * (Real(1) - s));
    }
    case Activation::Tanh: {
      const Real t = std::tanh(z);
      return Real(1) - t * t;
    }
  }
  return Real(1);
}

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw InputError(std::string(what) + " has length " + std::to_string(got) + ", expected " +
                     std::to_string(want));
  }
}

}  // namespace

template <typename Real>
Mlp<Real>::Mlp(std::vector<DenseLayer<Real>> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InputError("an MLP needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.rows == 0 || l.cols == 0) throw InputError("layer " + std::to_string(i) + " has a zero dimension");
    if (l.weights.size() != l.rows * l.cols || l.bias.size() != l.rows) {
      throw InputError("layer " + std::to_string(i) + " buffers do not match its " + std::to_string(l.rows) + "x" +
                       std::to_string(l.cols) + " shape");
    }
    if (!is_valid_activation(static_cast<std::uint8_t>(l.activation))) {
      throw InputError("layer " + std::to_string(i) + " has an invalid activation");
    }
    if (i > 0 && layers_[i - 1].rows != l.cols) {
      throw InputError("layer " + std::to_string(i - 1) + " outputs " + std::to_string(layers_[i - 1].rows) +
                       " values but layer " + std::to_string(i) + " expects " + std::to_string(l.cols));
    }
  }
}

template <typename Real>
Mlp<Real> Mlp<Real>::initialized(std::span<const std::size_t> widths, Activation hidden, Activation output,
                                 std::uint64_t seed) {
  if (widths.size() < 2) throw InputError("need at least input and output widths");
  Rng rng(seed);
  std::vector<DenseLayer<Real>> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    DenseLayer<Real> l;
    l.cols = widths[i];
    l.rows = widths[i + 1];
    l.activation = (i + 2 == widths.size()) ? output : hidden;
    if (l.cols == 0 || l.rows == 0) throw InputError("layer widths must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    l.weights.resize(l.rows * l.cols);
    l.bias.resize(l.rows);
    for (auto& w : l.weights) w = static_cast<Real>(dist(rng));
    for (auto& b : l.bias) b = static_cast<Real>(dist(rng));
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers));
}

template <typename Real>
std::size_t Mlp<Real>::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

template <typename Real>
bool Mlp<Real>::all_finite() const noexcept {
  for (const auto& l : layers_) {
    for (Real w : l.weights)
      if (!std::isfinite(w)) return false;
    for (Real b : l.bias)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

template <typename Real>
std::vector<Real> Mlp<Real>::forward(std::span<const Real> x) const {
  check_dim(x.size(), input_dim(), "MLP input");
  std::vector<Real> cur(x.begin(), x.end());
  std::vector<Real> next;
  for (const auto& l : layers_) {
    next.assign(l.rows, Real(0));
    for (std::size_t r = 0; r < l.rows; ++r) {
      const Real* w = l.weights.data() + r * l.cols;
      Real acc = l.bias[r];
      for (std::size_t c = 0; c < l.cols; ++c) acc += w[c] * cur[c];
      next[r] = activate(l.activation, acc);
    }
    cur.swap(next);
  }
  return cur;
}

template <typename Real>
void Mlp<Real>::forward(std::span<const Real> x, MlpTape<Real>& tape) const {
  check_dim(x.size(), input_dim(), "MLP input");
  tape.inputs.resize(layers_.size());
  tape.preactivations.resize(layers_.size());
  std::vector<Real> cur(x.begin(), x.end());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    tape.inputs[i] = cur;
    auto& z = tape.preactivations[i];
    z.assign(l.rows, Real(0));
    cur.assign(l.rows, Real(0));
    for (std::size_t r = 0; r < l.rows; ++r) {
      const Real* w = l.weights.data() + r * l.cols;
      Real acc = l.bias[r];
      for (std::size_t c = 0; c < l.cols; ++c) acc += w[c] * tape.inputs[i][c];
      z[r] = acc;
      cur[r] = activate(l.activation, acc);
    }
  }
  tape.output = std::move(cur);
}

template <typename Real>
std::vector<Real> Mlp<Real>::backward(const MlpTape<Real>& tape, std::span<const Real> upstream,
                                      MlpGradients<Real>& grads) const {
  check_dim(upstream.size(), output_dim(), "upstream gradient");
  if (tape.inputs.size() != layers_.size()) throw InputError("tape does not belong to this model");
  if (grads.weights.size() != layers_.size()) grads = MlpGradients<Real>::zeros_like(*this);

  std::vector<Real> delta(upstream.begin(), upstream.end());
  std::vector<Real> prev;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& l = layers_[i];
    const auto& z = tape.preactivations[i];
    const auto& in = tape.inputs[i];
    for (std::size_t r = 0; r < l.rows; ++r) delta[r] *= activate_derivative(l.activation, z[r]);

    auto& gw = grads.weights[i];
    auto& gb = grads.bias[i];
    prev.assign(l.cols, Real(0));
    for (std::size_t r = 0; r < l.rows; ++r) {
      const Real d = delta[r];
      gb[r] += d;
      const Real* w = l.weights.data() + r * l.cols;
      Real* g = gw.data() + r * l.cols;
      for (std::size_t c = 0; c < l.cols; ++c) {
        g[c] += d * in[c];
        prev[c] += w[c] * d;
      }
    }
    delta.swap(prev);
  }
  return delta;
}

template <typename Real>
std::vector<TensorView<Real>> Mlp<Real>::parameters() {
  std::vector<TensorView<Real>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.push_back({"layer" + std::to_string(i) + ".weight", layers_[i].weights});
    out.push_back({"layer" + std::to_string(i) + ".bias", layers_[i].bias});
  }
  return out;
}

template <typename Real>
std::vector<TensorView<const Real>> Mlp<Real>::parameters() const {
  std::vector<TensorView<const Real>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.push_back({"layer" + std::to_string(i) + ".weight", layers_[i].weights});
    out.push_back({"layer" + std::to_string(i) + ".bias", layers_[i].bias});
  }
  return out;
}

template <typename Real>
MlpGradients<Real> MlpGradients<Real>::zeros_like(const Mlp<Real>& model) {
  MlpGradients g;
  for (const auto& l : model.layers()) {
    g.weights.emplace_back(l.weights.size(), Real(0));
    g.bias.emplace_back(l.bias.size(), Real(0));
  }
  return g;
}

template <typename Real>
void MlpGradients<Real>::set_zero() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), Real(0));
  for (auto& b : bias) std::fill(b.begin(), b.end(), Real(0));
}

template <typename Real>
void MlpGradients<Real>::scale(Real factor) {
  for (auto& w : weights)
    for (auto& v : w) v *= factor;
  for (auto& b : bias)
    for (auto& v : b) v *= factor;
}

template <typename Real>
bool MlpGradients<Real>::all_finite() const {
  for (const auto& w : weights)
    for (Real v : w)
      if (!std::isfinite(v)) return false;
  for (const auto& b : bias)
    for (Real v : b)
      if (!std::isfinite(v)) return false;
  return true;
}

template <typename Real>
MlpBackwardResult<Real> mlp_backward(const Mlp<Real>& model, std::span<const Real> x,
                                     std::span<const Real> upstream) {
  MlpTape<Real> tape;
  model.forward(x, tape);
  MlpBackwardResult<Real> result;
  result.grads = MlpGradients<Real>::zeros_like(model);
  result.input_grad = model.backward(tape, upstream, result.grads);
  return result;
}

template class Mlp<float>;
template class Mlp<double>;
template struct MlpGradients<float>;
template struct MlpGradients<double>;
template MlpBackwardResult<float> mlp_backward(const Mlp<float>&, std::span<const float>, std::span<const float>);
template MlpBackwardResult<double> mlp_backward(const Mlp<double>&, std::span<const double>,
                                                std::span<const double>);

}  // namespace rda

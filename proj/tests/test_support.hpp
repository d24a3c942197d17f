#pragma once

// Shared helpers for the unit and acceptance suites. Nothing here calls into
// the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "rda/diffusion.hpp"
#include "rda/numerics/mlp.hpp"

namespace rda::testing {

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// Straight matrix-product evaluation of a dense network.
inline std::vector<double> reference_forward(const Mlp<double>& model, std::vector<double> x) {
  for (const auto& l : model.layers()) {
    std::vector<double> y(l.rows);
    for (std::size_t r = 0; r < l.rows; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < l.cols; ++c) acc += l.weights[r * l.cols + c] * x[c];
      acc += l.bias[r];
      switch (l.activation) {
        case Activation::Identity: y[r] = acc; break;
        case Activation::Relu: y[r] = std::max(acc, 0.0); break;
        case Activation::Silu: y[r] = acc / (1.0 + std::exp(-acc)); break;
        case Activation::Tanh: y[r] = std::tanh(acc); break;
      }
    }
    x = std::move(y);
  }
  return x;
}

/// Relative error with an absolute floor so near-zero entries compare sanely.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Denoiser of the given dimension whose network F is identically zero, so
/// denoise() reduces to the skip path c_skip(sigma) * x.
template <typename Real>
DenoiserParams<Real> zero_denoiser(std::size_t dim, double sigma_data) {
  auto params = make_denoiser<Real>(dim, ArchitectureConfig{}, sigma_data, 1);
  std::vector<DenseLayer<Real>> layers = params.net.layers();
  for (auto& l : layers) {
    std::fill(l.weights.begin(), l.weights.end(), Real(0));
    std::fill(l.bias.begin(), l.bias.end(), Real(0));
  }
  params.net = Mlp<Real>(std::move(layers));
  return params;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("rda_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void spit_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  out << text;
}

}  // namespace rda::testing

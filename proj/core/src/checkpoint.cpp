#include "rda/checkpoint.hpp"

#include <cmath>
#include <cstring>

#include "binary_io.hpp"
#include "rda/errors.hpp"

namespace rda {

std::vector<std::uint8_t> encode_checkpoint(const DenoiserParams<float>& params) {
  params.validate();
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(params.feature_dim()));
  w.u32(static_cast<std::uint32_t>(params.net.layers().size()));
  for (const auto& l : params.net.layers()) {
    w.u32(static_cast<std::uint32_t>(l.rows));
    w.u32(static_cast<std::uint32_t>(l.cols));
    w.u8(static_cast<std::uint8_t>(l.activation));
    w.f32s(l.weights);
    w.f32s(l.bias);
  }
  w.f32(static_cast<float>(params.precond.sigma_data));
  return w.take();
}

DenoiserParams<float> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::MagicMismatch, "expected \"RDAM\", found \"" + std::string(magic, 4) + "\"");
  }
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError(FormatErrorKind::BadVersion, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto feature_dim = r.u32("feature dim");
  const auto layer_count = r.u32("layer count");
  if (feature_dim == 0 || layer_count == 0) {
    throw FormatError(FormatErrorKind::BadHeader, "feature dim and layer count must be positive");
  }

  std::vector<DenseLayer<float>> layers;
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    DenseLayer<float> l;
    l.rows = r.u32("layer rows");
    l.cols = r.u32("layer cols");
    const auto act = r.u8("activation");
    if (!is_valid_activation(act)) {
      throw FormatError(FormatErrorKind::BadHeader, "layer " + std::to_string(i) + " has unknown activation " +
                                                        std::to_string(act));
    }
    l.activation = static_cast<Activation>(act);
    const std::uint64_t n = std::uint64_t{l.rows} * l.cols;
    r.require(n * sizeof(float) + l.rows * sizeof(float), "layer parameters");
    l.weights.resize(n);
    l.bias.resize(l.rows);
    r.f32s(l.weights, "layer weights");
    r.f32s(l.bias, "layer bias");
    layers.push_back(std::move(l));
  }
  const float sigma_data = r.f32("sigma_data");
  if (r.remaining() != 0) {
    throw FormatError(FormatErrorKind::TrailingData, std::to_string(r.remaining()) + " bytes after checkpoint");
  }

  DenoiserParams<float> params;
  try {
    params.net = Mlp<float>(std::move(layers));
  } catch (const InputError& e) {
    throw FormatError(FormatErrorKind::InconsistentDims, e.what());
  }
  if (!params.net.all_finite()) throw FormatError(FormatErrorKind::NonFinite, "checkpoint holds non-finite weights");
  params.precond.sigma_data = sigma_data;
  if (params.feature_dim() != feature_dim || params.net.input_dim() != feature_dim + 1) {
    throw FormatError(FormatErrorKind::InconsistentDims,
                      "layers do not map " + std::to_string(feature_dim + 1) + " -> " + std::to_string(feature_dim));
  }
  if (!(sigma_data > 0.0f) || !std::isfinite(sigma_data)) {
    throw FormatError(FormatErrorKind::BadHeader, "sigma_data must be positive and finite");
  }
  return params;
}

std::size_t save_checkpoint(const DenoiserParams<float>& params, const std::filesystem::path& destination) {
  const auto bytes = encode_checkpoint(params);
  detail::write_file(destination, bytes);
  return bytes.size();
}

DenoiserParams<float> load_checkpoint(const std::filesystem::path& source) {
  return decode_checkpoint(detail::read_file(source));
}

}  // namespace rda

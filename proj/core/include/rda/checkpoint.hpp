#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rda/diffusion.hpp"

namespace rda {

/// Model checkpoint layout (little-endian):
///   "RDAM" | u32 version (1) | u32 feature dim | u32 layer count |
///   per layer: u32 rows | u32 cols | u8 activation | rows*cols f32 | rows f32 |
///   f32 sigma_data
inline constexpr char kCheckpointMagic[4] = {'R', 'D', 'A', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const DenoiserParams<float>& params);
DenoiserParams<float> decode_checkpoint(std::span<const std::uint8_t> bytes);

std::size_t save_checkpoint(const DenoiserParams<float>& params, const std::filesystem::path& destination);
DenoiserParams<float> load_checkpoint(const std::filesystem::path& source);

}  // namespace rda

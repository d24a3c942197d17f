#pragma once

#include <cstdint>
#include <random>

namespace rda {

using Rng = std::mt19937_64;

/// Independent generator for `stream` under a root `seed`. Used to give every
/// sample its own stream so results do not depend on evaluation order.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace rda

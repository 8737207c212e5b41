#pragma once

#include <cstdint>
#include <random>

namespace dssg {

using Rng = std::mt19937_64;

/// Independent stream for one (agent, iteration) pair of a seeded run. Every
/// random draw an agent makes during an iteration comes from its own stream,
/// so results do not depend on the order in which agents are processed.
inline Rng agent_stream(std::uint64_t seed, std::uint64_t agent, std::uint64_t iteration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(agent), static_cast<std::uint32_t>(agent >> 32),
                    static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(iteration >> 32),
                    0x5eedu};
  return Rng(seq);
}

/// Stream for one-off construction work (graphs, synthetic data).
inline Rng construction_stream(std::uint64_t seed, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), purpose, 0xc0deu};
  return Rng(seq);
}

}  // namespace dssg

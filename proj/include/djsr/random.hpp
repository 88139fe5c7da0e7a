#pragma once

#include <cstdint>
#include <random>

namespace djsr {

// Independent generator for (seed, tag, index); every consumer of randomness
// derives its own stream so results do not depend on evaluation order.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace djsr

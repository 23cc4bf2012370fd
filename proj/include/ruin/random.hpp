#pragma once

// Random streams: one Mersenne Twister per run, seeded from (seed, run index).

#include <cstdint>
#include <random>

#include <boost/random/exponential_distribution.hpp>

namespace ruin {

using RandomStream = std::mt19937_64;

// Independent stream for run `index` of an experiment seeded with `seed`.
inline RandomStream substream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x5eedu};
    return RandomStream(seq);
}

// Uniform on [0, 1) from the top 53 bits of one draw.
inline double uniform01(RandomStream& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

// Exp(1) by the ziggurat method.
inline double standard_exponential(RandomStream& gen) {
    return boost::random::exponential_distribution<double>(1.0)(gen);
}

}  // namespace ruin

#pragma once

#include <array>
#include <cstdint>

namespace spotcheck::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
Block philox4x32(Block counter, Key key);

// Stateless generator: every (seed, stream, domain, index) maps to a fixed
// pair of uniforms, so any draw can be reproduced in isolation.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream, std::uint32_t domain)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream),
          domain_(domain) {}

    // Two uniforms in (0, 1) with 53-bit resolution.
    std::array<double, 2> uniforms(std::uint64_t index) const;

private:
    Key key_;
    std::uint32_t stream_;
    std::uint32_t domain_;
};

}  // namespace spotcheck::rng

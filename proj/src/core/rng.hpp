#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lqcpg {

// Philox4x32-10 counter-based generator.  Every draw is a pure function of
// (seed, stream tag, path, index, component), so path simulation is
// embarrassingly parallel and bit-reproducible regardless of scheduling.
namespace philox {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, ctr[0], hi0, lo0);
        mulhilo(kM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

inline double to_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t x = (static_cast<std::uint64_t>(a) << 32) | b;
    return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;  // in (0, 1)
}

}  // namespace philox

enum class RngStream : std::uint32_t { InitialState = 1, BrownianIncrement = 2, ActionNoise = 3 };

// Standard normal draw via Box-Muller on one Philox block.
inline double normal_draw(std::uint64_t seed, RngStream stream, std::uint32_t path, std::uint32_t index,
                          std::uint32_t component) {
    const std::array<std::uint32_t, 4> ctr{path, index, component, static_cast<std::uint32_t>(stream)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed),
                                           static_cast<std::uint32_t>(seed >> 32)};
    const auto words = philox::block(ctr, key);
    const double u1 = philox::to_unit(words[0], words[1]);
    const double u2 = philox::to_unit(words[2], words[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace lqcpg

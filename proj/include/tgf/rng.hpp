#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace tgf {

using u64 = std::uint64_t;

// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
inline std::array<u64, 4> philox4x64(std::array<u64, 4> ctr, std::array<u64, 2> key)
{
    constexpr u64 M0 = 0xD2E7470EE14C6C93ULL, M1 = 0xCA5A826395121157ULL;
    constexpr u64 W0 = 0x9E3779B97F4A7C15ULL, W1 = 0xBB67AE8584CAA73BULL;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += W0;
            key[1] += W1;
        }
        unsigned __int128 p0 = (unsigned __int128)M0 * ctr[0];
        unsigned __int128 p1 = (unsigned __int128)M1 * ctr[2];
        u64 hi0 = u64(p0 >> 64), lo0 = u64(p0);
        u64 hi1 = u64(p1 >> 64), lo1 = u64(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

enum class StreamTag : u64 { Wiener = 1, Initial = 2, Survey = 3 };

// Standard normal from two 64-bit words (Box-Muller, cosine branch).
inline double normal_from_bits(u64 a, u64 b)
{
    double u1 = (double((a >> 11) + 1)) * 0x1.0p-53;
    double u2 = double(b >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Deterministic N(0,1) draw addressed by (seed, tag; a, b, c).
inline double normal_at(u64 seed, StreamTag tag, u64 a, u64 b, u64 c)
{
    auto r = philox4x64({a, b, c, 0}, {seed, u64(tag)});
    return normal_from_bits(r[0], r[1]);
}

inline double uniform_at(u64 seed, StreamTag tag, u64 a, u64 b, u64 c)
{
    auto r = philox4x64({a, b, c, 1}, {seed, u64(tag)});
    return double(r[0] >> 11) * 0x1.0p-53;
}

} // namespace tgf

#pragma once

#include <array>
#include <cstdint>

namespace mlpmc::rng {

// Philox-4x32-10 block cipher (Salmon et al., SC'11). Counter-based: every
// 128-bit output block is a pure function of (counter, key), which is what
// makes random access by offset and replay across thread schedules possible.

struct PhiloxBlock {
    std::array<std::uint32_t, 4> w;
};

namespace detail {
inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t x[4], std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    x[0] = hi1 ^ x[1] ^ k0;
    x[1] = lo1;
    x[2] = hi0 ^ x[3] ^ k1;
    x[3] = lo0;
}
}  // namespace detail

inline PhiloxBlock philox4x32_10(const std::array<std::uint32_t, 4>& counter,
                                 std::uint32_t key0, std::uint32_t key1) {
    std::uint32_t x[4] = {counter[0], counter[1], counter[2], counter[3]};
    std::uint32_t k0 = key0;
    std::uint32_t k1 = key1;
    for (int r = 0; r < 10; ++r) {
        detail::philox_round(x, k0, k1);
        k0 += detail::kPhiloxW0;
        k1 += detail::kPhiloxW1;
    }
    return PhiloxBlock{{x[0], x[1], x[2], x[3]}};
}

// Identity of one derived stream: Philox key plus the high counter words.
// Two streams whose 128-bit identities differ produce unrelated sequences.
struct StreamState {
    std::uint32_t key0 = 0;
    std::uint32_t key1 = 0;
    std::uint32_t salt0 = 0;
    std::uint32_t salt1 = 0;

    [[nodiscard]] PhiloxBlock block(std::uint64_t block_index) const {
        return philox4x32_10({static_cast<std::uint32_t>(block_index),
                              static_cast<std::uint32_t>(block_index >> 32), salt0, salt1},
                             key0, key1);
    }
};

// Converts 64 random bits into a double strictly inside (0, 1).
// (v >> 11) + 0.5 lies in (0, 2^53), so the result never hits an endpoint.
inline double u01_from_bits(std::uint64_t v) {
    return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}

inline std::uint64_t join_words(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

}  // namespace mlpmc::rng

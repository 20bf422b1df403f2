// SPDX-License-Identifier: MIT
#include "spiketensor/rng.hpp"

#include <cmath>
#include <numbers>

namespace spiketensor {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
    philox_round(counter, key);
    for (int r = 1; r < 10; ++r) {
        key[0] += kW0;
        key[1] += kW1;
        philox_round(counter, key);
    }
    return counter;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Rng Rng::split(std::uint64_t tag) const {
    return Rng(state_.seed, mix64(state_.stream ^ mix64(tag + 0x5851F42D4C957F2Dull)));
}

std::array<std::uint64_t, 2> Rng::block(std::uint64_t counter) const {
    const auto w = philox4x32(
        {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
         static_cast<std::uint32_t>(state_.stream), static_cast<std::uint32_t>(state_.stream >> 32)},
        {static_cast<std::uint32_t>(state_.seed), static_cast<std::uint32_t>(state_.seed >> 32)});
    return {std::uint64_t{w[0]} | (std::uint64_t{w[1]} << 32), std::uint64_t{w[2]} | (std::uint64_t{w[3]} << 32)};
}

double Rng::normal_from(const std::array<std::uint64_t, 2>& b) {
    const double u1 = to_open_closed(b[0]);
    const double u2 = to_open_closed(b[1]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::uniform_open_closed() { return to_open_closed(next_u64()); }
double Rng::uniform() { return to_closed_open(next_u64()); }
double Rng::normal() { return normal_from(next_block()); }

std::uint64_t Rng::below(std::uint64_t n) {
    // Lemire's multiply-shift with rejection.
    while (true) {
        const std::uint64_t x = next_u64();
        __extension__ using u128 = unsigned __int128;
        const u128 m = static_cast<u128>(x) * n;
        const auto low = static_cast<std::uint64_t>(m);
        if (low >= n || low >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
    }
}

}  // namespace spiketensor

// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <cstdint>

namespace spiketensor {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Identity of a random stream: the seed keys the block cipher and the stream
/// id occupies the upper half of the 128-bit counter.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    friend bool operator==(const RngState&, const RngState&) = default;
};

/// Counter-based generator. Block i of stream (seed, stream) is
/// philox(counter = (i_lo, i_hi, stream_lo, stream_hi), key = (seed_lo, seed_hi)),
/// so any block can be computed without generating the ones before it.
///
/// Derived values:
///   uniform in (0,1]  : ((w >> 11) + 1) * 2^-53 with w the low 64 bits of a block
///   uniform in [0,1)  : (w >> 11) * 2^-53
///   normal            : Box-Muller, sqrt(-2 ln u1) cos(2 pi u2), u1 from the low and
///                       u2 from the high 64 bits of one block, both in (0,1]
///   Rademacher sign   : bit 0 of the high 64 bits
/// Sequential draws consume exactly one block each.
class Rng {
public:
    Rng() = default;
    Rng(std::uint64_t seed, std::uint64_t stream) : state_{seed, stream} {}
    explicit Rng(RngState state) : state_(state) {}

    [[nodiscard]] const RngState& state() const { return state_; }
    [[nodiscard]] std::uint64_t position() const { return counter_; }

    /// Independent child stream, identified by hashing (stream, tag).
    [[nodiscard]] Rng split(std::uint64_t tag) const;

    /// Random-access block.
    [[nodiscard]] std::array<std::uint64_t, 2> block(std::uint64_t counter) const;

    std::array<std::uint64_t, 2> next_block() { return block(counter_++); }
    std::uint64_t next_u64() { return next_block()[0]; }
    double uniform_open_closed();  // (0,1]
    double uniform();              // [0,1)
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    static double to_open_closed(std::uint64_t w) { return static_cast<double>((w >> 11) + 1) * 0x1.0p-53; }
    static double to_closed_open(std::uint64_t w) { return static_cast<double>(w >> 11) * 0x1.0p-53; }
    static double normal_from(const std::array<std::uint64_t, 2>& b);

private:
    RngState state_;
    std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer; used to derive stream ids.
std::uint64_t mix64(std::uint64_t x);

}  // namespace spiketensor

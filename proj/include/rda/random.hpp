#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace rda {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// 64-bit FNV-1a, used to turn stream labels into keys.
std::uint64_t fnv1a64(std::string_view text);

/// Derives an integer seed for a named purpose from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Counter-based random stream. A stream is fully determined by
/// (seed, label); draws advance a 128-bit block counter, so two streams
/// with different labels never share state.
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view label);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n);

    std::uint64_t draws() const { return draws_; }

private:
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;
    std::uint64_t draws_ = 0;
};

}  // namespace rda

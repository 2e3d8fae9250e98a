#pragma once

#include <cstdint>

namespace netsense {

// SplitMix64 (Sebastiano Vigna, public domain reference sequence). Chosen as
// the project's fixed generator because the mapping seed -> sequence is
// specified exactly and is trivially reproducible in any language.
// First three outputs for seed 42:
//   0xbdd732262feb6e95, 0x28efe333b266f103, 0x47526757130f9f52
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased-enough bounded draw: multiply-shift on the full 64-bit output.
    constexpr std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

private:
    std::uint64_t state_;
};

}  // namespace netsense

#pragma once

#include <cstdint>
#include <cstring>

#include "pilotwave/frame_io.hpp"

namespace pilotwave {

// splitmix64: tiny state, full 64-bit period, good mixing for the few
// million draws a sampling run needs
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1) with the full 53-bit mantissa
    double uniform01() { return double(next() >> 11) * 0x1.0p-53; }
};

// independent stream for one draw/trajectory, derived by hashing the master
// seed with a counter so streams can be created in any order on any thread
inline std::uint64_t stream_for(std::uint64_t master, std::uint64_t counter) {
    unsigned char bytes[16];
    std::memcpy(bytes, &master, 8);
    std::memcpy(bytes + 8, &counter, 8);
    return fnv1a(bytes, sizeof bytes);
}

}  // namespace pilotwave

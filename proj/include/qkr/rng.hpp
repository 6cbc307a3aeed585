/* Deterministic parallel RNG substreams.
 *
 * Each trajectory (or classical particle) owns a private xoshiro256++ stream
 * whose state is derived from (master seed, stream index) by reading four
 * consecutive outputs of a splitmix64 sequence positioned at counter
 * 4*stream_index. Streams are reproducible for a fixed master seed and
 * independent of how work is scheduled across threads.
 */
#pragma once

#include <cstdint>

namespace qkr {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) {
        // splitmix64 state at counter c is seed + c*gamma, so positioning
        // at 4*stream_index is O(1).
        SplitMix64 sm(master_seed + 4ULL * stream_index * 0x9e3779b97f4a7c15ULL);
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // xoshiro forbids all-zero
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 significant bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}  // namespace qkr

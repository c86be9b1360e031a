#pragma once

#include <cstdint>
#include <random>

namespace fifotap {

// Seeded RNG with a portable uniform mapping. The engine's sequence is pinned
// by the standard; std::uniform_real_distribution is not, so doubles are
// produced by an explicit 53-bit mapping instead.
class rng {
public:
    explicit rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // uniform in [0, 1) bounded away from 0 (safe for log())
    double uniform_pos() {
        double u = uniform();
        return u > 0.0 ? u : 0x1.0p-53;
    }

    std::uint64_t next() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace fifotap

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace fiberlink {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives the seed of a fixed sub-stream from a master seed. Stream ids are
/// part of the reproducibility contract; the simulation layout is documented
/// in link.cpp.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
    std::uint64_t s = master ^ (0xA0761D6478BD642Full * (stream_id + 1));
    return splitmix64(s);
}

/// xoshiro256** with an explicit Gaussian transform, so that a given seed
/// yields the same stream on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static Rng substream(std::uint64_t master, std::uint64_t stream_id) {
        return Rng(derive_seed(master, stream_id));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in (0, 1], 53-bit resolution.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via the trigonometric Box-Muller transform. The
    /// transform consumes exactly two uniforms per pair, which keeps the
    /// stream position a pure function of the number of draws.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    void fill_gaussian(std::span<double> out) {
        for (auto& v : out) v = gaussian();
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace fiberlink

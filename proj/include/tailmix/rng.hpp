#pragma once

#include <cstdint>
#include <random>

namespace tailmix {

// splitmix64 finalizer; used both as a PRNG step and as a seed mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// A seeded random stream. All randomness in the library flows through
// caller-supplied streams; there is no hidden global state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform on the open interval (0,1).
    double uniform01() {
        double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Uniform on {0,...,n-1}.
    int uniform_int(int n) {
        return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
    }

    double exponential() { return -std::log(uniform01()); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// Derives a reproducible stream from a master seed and up to two labels
// (e.g. repetition index and purpose). Distinct labels give statistically
// independent streams.
inline RngStream derive_stream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s ^= a * 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b * 0xd1b54a32d192ed03ULL;
    h ^= splitmix64(s);
    return RngStream(h);
}

} // namespace tailmix

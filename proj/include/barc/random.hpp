#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace barc {

/// splitmix64 finalizer; the mixing function used for every derived seed.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and two indices.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return mix64(mix64(mix64(parent) ^ (a + 0x632be59bd9b4e019ULL)) ^ (b + 0x8cb92ba72f3d8dd7ULL));
}

// Named substreams of a run seed.
enum class Stream : std::uint64_t { ensemble = 1, fading = 2, symbols = 3, noise = 4, patterns = 5, init = 6 };

inline std::uint64_t substream(std::uint64_t run_seed, Stream s, std::uint64_t index = 0) noexcept {
    return derive_seed(run_seed, static_cast<std::uint64_t>(s), index);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    double normal() { return normal_(engine_); }
    bool coin() { return (engine_() >> 63) != 0; }

    /// Circularly symmetric complex Gaussian with E|x|^2 = variance.
    std::complex<double> complex_normal(double variance) {
        const double s = std::sqrt(0.5 * variance);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace barc

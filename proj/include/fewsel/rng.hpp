#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fewsel {

// SplitMix64 (Steele, Lea & Flood 2014). All randomness in the toolkit flows
// through this generator: the state update is a 64-bit counter and the output
// is a fixed avalanche mix, so sequences are reproducible bit-for-bit on any
// platform and trivially portable to other languages. std::mt19937 and the
// std distributions are deliberately avoided; their outputs are not pinned
// across standard library implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_double_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Multiply-shift (Lemire 2019); the residual
    // bias is below 2^-64 and the result is platform-independent.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller on the portable uniform stream.
    double next_gaussian() {
        const double u1 = next_double_open();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

// Derives an independent child seed for a named substream (selection RNG,
// task generation, per-baseline draws, ...) from one top-level seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0xA0761D6478BD642Full + stream * 0xE7037ED1A0B428DBull));
    return g.next_u64();
}

// Fisher-Yates prefix: the first k entries of a uniformly random permutation
// of {0, ..., n-1}.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                           SplitMix64& rng) {
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(k);
    return ids;
}

}  // namespace fewsel

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dynfer {

// splitmix64 step; used to derive independent stream seeds from (seed, index).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/**
 * Deterministic sample stream over a fixed engine (mt19937_64, so sequences
 * are identical across compilers and platforms for a given seed).
 *
 * Categorical draws use inverse CDF over the stored entry order and consume
 * exactly one uniform each, including from deterministic rows.
 */
class SampleStream {
  public:
    explicit SampleStream(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Index k with probability probs[k]. Rounding slack at the top of the
    // CDF falls to the last entry with positive mass.
    int sample(const std::vector<double>& probs) {
        double u = uniform01();
        double cum = 0.0;
        int last_positive = -1;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            if (probs[k] > 0.0) last_positive = static_cast<int>(k);
            cum += probs[k];
            if (u < cum && probs[k] > 0.0) return static_cast<int>(k);
        }
        return last_positive;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace dynfer

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gridforest {

/// Seeded RNG with portable derivations. std::mt19937_64 output is specified
/// by the standard; the std::uniform_* distributions are not, so uniform
/// draws are derived here directly from raw 64-bit output.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be > 0.
    uint64_t next_below(uint64_t n) {
        // rejection sampling to avoid modulo bias
        const uint64_t limit = n * (UINT64_MAX / n);
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    /// Index drawn with probability proportional to weights[i]. Falls back to
    /// uniform when the total weight is not positive.
    size_t weighted_index(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += (w > 0.0 ? w : 0.0);
        if (!(total > 0.0)) return static_cast<size_t>(next_below(weights.size()));
        double r = next_double() * total;
        for (size_t i = 0; i < weights.size(); ++i) {
            double w = weights[i] > 0.0 ? weights[i] : 0.0;
            if (r < w) return i;
            r -= w;
        }
        return weights.size() - 1;
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

/// splitmix64 step; used to derive independent sub-seeds from a master seed.
inline uint64_t mix_seed(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t combine_seed(uint64_t a, uint64_t b) { return mix_seed(a ^ mix_seed(b)); }

}  // namespace gridforest

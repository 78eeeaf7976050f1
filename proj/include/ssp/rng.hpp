#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace ssp {

// Seeded random source with platform-independent draw semantics.
//
// std::uniform_real_distribution et al. are implementation-defined, so all
// sampling here is built directly on the mt19937_64 output stream. Two
// processes constructed with the same seed and issuing the same call
// sequence produce bit-identical results.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform double in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Index into a probability vector by CDF walk. Probabilities are assumed
    // to sum to ~1; any floating-point shortfall is absorbed by the last
    // nonzero entry.
    int categorical(std::span<const double> probs) {
        if (probs.empty()) throw std::invalid_argument("categorical: empty distribution");
        const double u = uniform();
        double cdf = 0.0;
        int last_positive = -1;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] > 0.0) last_positive = static_cast<int>(i);
            cdf += probs[i];
            if (u < cdf) return static_cast<int>(i);
        }
        if (last_positive < 0) throw std::invalid_argument("categorical: all-zero distribution");
        return last_positive;
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace ssp

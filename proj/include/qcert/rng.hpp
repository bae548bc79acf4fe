#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace qcert {

// splitmix64 step; the project-wide primitive behind all randomness.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives the stream seed for item `index` of a master seed.  Fixed bit-exact
// so that per-item generation is order-independent and parallel-safe:
//   h0 = splitmix64(master); h1 = splitmix64(h0 ^ (index + 0x9E3779B97F4A7C15)).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t h0 = splitmix64(s);
    std::uint64_t t = h0 ^ (index + 0x9E3779B97F4A7C15ULL);
    return splitmix64(t);
}

// Minimal deterministic RNG stream.  Distributions are implemented by hand
// (uniform-from-bits, Box-Muller) so outputs are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Exponential with rate 1.
    double exponential() {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -std::log(u);
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Inverse-CDF sampling from explicit weights (assumed normalized to ~1).
// Deterministic tie handling: the first bucket whose cumulative sum exceeds u.
inline std::size_t sample_discrete(const std::vector<double>& probs, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
}

} // namespace qcert

#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace loopsim {

// Counter-based generator built on the splitmix64 finalizer.  Every stream is
// a pure function of the 64-bit state it was seeded with, so substreams derived
// from (master seed, index...) tuples are reproducible bit for bit and can be
// consumed in any order across threads.
struct Rng {
    using result_type = std::uint64_t;
    std::uint64_t state;

    explicit Rng(std::uint64_t seed = 0) : state(seed) {}

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ull; }

    std::uint64_t operator()() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform on [0,1)
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // uniform on [0,b)
    double uniform(double b) { return b * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    double exponential(double rate) {
        // 1 - u avoids log(0)
        return -std::log1p(-uniform01()) / rate;
    }

    // Knuth multiplication method; exact and portable.  Means here are O(1)
    // per edge, so the O(lambda) cost is irrelevant.  Large means are split
    // using additivity to keep the running product away from underflow.
    long poisson(double mean) {
        if (mean < 0) throw std::invalid_argument("poisson: negative mean");
        long total = 0;
        while (mean > 32.0) {
            total += poisson(32.0);
            mean -= 32.0;
        }
        const double limit = std::exp(-mean);
        double prod = uniform01();
        long k = 0;
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return total + k;
    }
};

namespace detail {
inline std::uint64_t avalanche(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}
} // namespace detail

// Substream derivation: feed each index word through the avalanche so that
// neighbouring indices land in unrelated parts of the state space.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a) {
    return detail::avalanche(seed + 0x9e3779b97f4a7c15ull * (a + 1));
}
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return substream(substream(seed, a), b);
}
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                               std::uint64_t c) {
    return substream(substream(seed, a, b), c);
}

} // namespace loopsim

#pragma once
// Seeded random streams.
//
// Every episode owns independent streams derived from (master seed, episode
// index, stream tag):
//
//   seed = mix(mix(mix(master) ^ episode) ^ tag)
//
// where mix is the SplitMix64 finalizer. The derivation is a pure counter
// function, so an episode's randomness does not depend on which worker runs
// it or in which order.

#include <cstdint>
#include <random>

namespace qbandit {

enum class StreamTag : std::uint64_t {
    Initial = 1,
    Arrivals = 2,
    Services = 3,
    Policy = 4,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t episode, StreamTag tag) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ episode) ^ static_cast<std::uint64_t>(tag));
}

// A 64-bit Mersenne Twister plus the gamma sampler whose cached normal
// variate is part of the stream state. Copying a stream copies both.
class RandomStream {
public:
    using result_type = std::mt19937_64::result_type;

    RandomStream() = default;
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t master, std::uint64_t episode, StreamTag tag)
        : engine_(derive_seed(master, episode, tag)) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    double gamma(double shape) {
        return gamma_(engine_, std::gamma_distribution<double>::param_type(shape, 1.0));
    }

    /// Exact Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b).
    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    friend bool operator==(const RandomStream& l, const RandomStream& r) {
        return l.engine_ == r.engine_ && l.gamma_ == r.gamma_;
    }

private:
    std::mt19937_64 engine_;
    std::gamma_distribution<double> gamma_;
};

} // namespace qbandit

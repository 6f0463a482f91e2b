#pragma once

#include <cstdint>
#include <random>

namespace sr {

// Single per-run random stream. Every stochastic decision in a run goes
// through one instance, so a (seed, config, dataset) triple replays
// bit-identically.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    // Uniform on (lo, hi]: rejects the lower endpoint.
    double uniform_open_lo(double lo, double hi) {
        double x;
        do {
            x = uniform(lo, hi);
        } while (x == lo);
        return x;
    }

    // Inclusive range.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }

    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return std::bernoulli_distribution(p)(engine_);
    }

    double exponential(double mean) {
        return std::exponential_distribution<double>(1.0 / mean)(engine_);
    }

    double normal(double mu, double sigma) {
        return std::normal_distribution<double>(mu, sigma)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace sr

#pragma once

#include <cstdint>

namespace mcstop {

// Source of uniform deviates strictly inside (0, 1).  Samplers draw all
// randomness through this interface so accept/reject decisions can be
// driven by forced values in tests.
class UniformSource {
public:
    virtual ~UniformSource() = default;
    virtual double next() = 0;
};

namespace detail {

// Finalizer from SplitMix64 (Stafford mix13),
// http://xoshiro.di.unimi.it/splitmix64.c
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based generator: output i is a hash of (key + i*gamma), where the
// key is derived from (seed, stream).  Identical (seed, stream) therefore
// reproduce the identical sequence, distinct streams start at essentially
// random distant points of the 2^64 cycle, and skip() is O(1).
class RngStream final : public UniformSource {
public:
    RngStream() : RngStream(0, 0) {}
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed),
          stream_(stream),
          state_(detail::mix64(detail::mix64(seed) + detail::mix64(stream ^ kGamma))) {}

    std::uint64_t next_u64() {
        state_ += kGamma;
        return detail::mix64(state_);
    }

    // Uniform on (0, 1), never returning either endpoint: 52 random bits
    // offset to bin centers.
    double next() override {
        return static_cast<double>((next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    // Jump ahead as if next_u64() had been called `count` times.
    void skip(std::uint64_t count) { state_ += count * kGamma; }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t state_;
};

// Inverse-CDF draws.  Deterministic across platforms (no library
// distribution objects involved) and each consumes exactly one uniform,
// which keeps forced-value tests simple.
double draw_normal(UniformSource& u);                    // N(0, 1)
double draw_exponential(UniformSource& u, double mean);  // Exp with given mean
double draw_uniform(UniformSource& u, double lo, double hi);

}  // namespace mcstop

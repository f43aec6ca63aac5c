#pragma once

// Counter-based random number generation (Philox 4x32-10) so that every
// consumer draws from an independent stream addressed by a 64-bit key.
// Environments become pure functions of (master seed, site), and Monte Carlo
// drivers stay bit-reproducible at any worker count. Salmon et al., SC 2011.

#include "rwde/rational.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rwde {

namespace detail {

inline constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mul_hi_lo(kPhiloxM4x32A, ctr[0], hi0, lo0);
        mul_hi_lo(kPhiloxM4x32B, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW32A;
        key[1] += kPhiloxW32B;
    }
    return ctr;
}

// splitmix64 finalizer; used to derive stream keys.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

// Named sub-streams hanging off one master seed.
enum class StreamTag : std::uint64_t {
    site_env = 1,
    boundary_env = 2,
    urn_walk = 3,
    quenched_walk = 4,
    graph_env = 5,
    start_pick = 6,
    graph_walk = 7,
    calibration = 8,
};

inline std::uint64_t derive_key(std::uint64_t seed, StreamTag tag, std::uint64_t payload = 0) {
    std::uint64_t h = detail::mix64(seed ^ 0xA5A5A5A55A5A5A5Aull);
    h = detail::mix64(h ^ static_cast<std::uint64_t>(tag));
    h = detail::mix64(h ^ payload);
    return h;
}

inline std::uint64_t derive_key(std::uint64_t seed, StreamTag tag, std::uint64_t payload,
                                std::uint64_t payload2) {
    return detail::mix64(derive_key(seed, tag, payload) ^ payload2);
}

inline std::uint64_t site_key(std::uint64_t seed, StreamTag tag, const IVec& site) {
    std::uint64_t h = derive_key(seed, tag);
    for (auto c : site) h = detail::mix64(h ^ static_cast<std::uint64_t>(c));
    return h;
}

class CounterRng {
  public:
    explicit CounterRng(std::uint64_t key) {
        key_ = {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    }

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return block_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // (0, 1); safe under log().
    double next_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("next_below: empty range");
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n + 1) % n;
        std::uint64_t v = next_u64();
        while (v > limit) v = next_u64();  // unbiased rejection
        return v % n;
    }

    // Standard UniformRandomBitGenerator interface.
    using result_type = std::uint32_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xFFFFFFFFu; }
    result_type operator()() { return next_u32(); }

  private:
    void refill() {
        block_ = detail::philox4x32_10(
            {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32), 0, 0},
            key_);
        ++counter_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
};

// Marsaglia polar method.
inline double sample_normal(CounterRng& rng) {
    while (true) {
        const double v1 = 2.0 * rng.next_double() - 1.0;
        const double v2 = 2.0 * rng.next_double() - 1.0;
        const double s = v1 * v1 + v2 * v2;
        if (s > 0.0 && s < 1.0) return v1 * std::sqrt(-2.0 * std::log(s) / s);
    }
}

// Marsaglia-Tsang rejection sampler; exact Gamma(shape, 1) distribution for
// any shape > 0 (boosted from shape+1 when shape < 1).
inline double sample_gamma(CounterRng& rng, double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) {
        const double g = sample_gamma(rng, shape + 1.0);
        return g * std::pow(rng.next_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        const double x = sample_normal(rng);
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = rng.next_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline std::vector<double> sample_dirichlet_params(CounterRng& rng,
                                                   const std::vector<double>& params) {
    if (params.empty()) throw std::invalid_argument("dirichlet: empty parameter list");
    for (double p : params)
        if (!(p > 0.0)) throw std::invalid_argument("dirichlet: parameters must be positive");
    if (params.size() == 1) return {1.0};
    std::vector<double> g(params.size());
    double total = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        g[i] = sample_gamma(rng, params[i]);
        total += g[i];
    }
    for (auto& v : g) v /= total;
    return g;
}

}  // namespace rwde

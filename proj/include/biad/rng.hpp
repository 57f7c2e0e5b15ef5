#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace biad {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// FNV-1a of a short label, used to tag independent random streams.
constexpr std::uint64_t stream_tag(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives the key for the stream identified by (master, a, b). Keys are
/// avalanched so nearby inputs give unrelated streams.
constexpr std::uint64_t stream_key(std::uint64_t master, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t k = detail::mix64(master + detail::kGolden);
    k = detail::mix64(k ^ (a + detail::kGolden));
    k = detail::mix64(k ^ (b + detail::kGolden));
    return k;
}

/// Counter-based generator (SplitMix64). The state is a Weyl counter, so a
/// stream's output depends only on its key and draw index, never on what
/// other streams do. Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key) : state_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64() { return detail::mix64(state_ += detail::kGolden); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a log/pow argument.
    double uniform_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). n must be >= 1.
    std::uint64_t below(std::uint64_t n) {
        // Lemire's multiply-shift with rejection of the biased strip.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = -n % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller (two fresh draws per call).
    double normal() {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    /// Pareto with the given scale (minimum) and shape; mean = shape*scale/(shape-1).
    double pareto(double scale, double shape) { return scale * std::pow(uniform_open(), -1.0 / shape); }

private:
    std::uint64_t state_;
};

}  // namespace biad

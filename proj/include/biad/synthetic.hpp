#pragma once

#include <cstdint>

#include "biad/rating_matrix.hpp"

namespace biad {

/// Efficacy threshold the synthetic generator calibrates to: for every user
/// the number of entries >= kReferenceEta is Binomial(m, target/m), so the
/// per-user effective count has mean target_effective_mean exactly.
inline constexpr double kReferenceEta = 7.0;

/// Recipe for a synthetic ground-truth matrix. Stands in for a completed
/// real rating matrix: effectiveness is driven by a shared global item
/// quality plus a low-rank personal taste term, so the matrix is learnable
/// and globally popular items are effective for most users.
struct SyntheticSpec {
    std::size_t num_items = 2000;           // m
    std::size_t num_users = 500;
    double target_effective_mean = 150.0;   // desired mean per-user count of entries >= kReferenceEta
    double rating_noise_spread = 0.5;       // jitter added to ratings inside each class band
    std::uint64_t seed = 1;
};

/// Deterministic for a fixed spec. Throws ConfigError when the spec is
/// infeasible (target_effective_mean not in (0, m), negative spread).
RatingMatrix generate_synthetic(const SyntheticSpec& spec);

}  // namespace biad

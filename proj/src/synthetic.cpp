#include "biad/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "biad/errors.hpp"
#include "biad/rng.hpp"

namespace biad {

namespace {

// Latent model constants. The global component makes item quality agree
// across users (as in completed real matrices); the taste component keeps
// preferences personal and learnable at low rank.
constexpr int kLatentRank = 8;
constexpr double kGlobalWeight = 0.95;
// Ineffective ratings occupy the bottom slice of [0, eta): bad items score
// clearly below the threshold instead of hugging it.
constexpr double kIneffectiveBandFraction = 0.85;
// Affinity anchors for the rating map. Ratings are an absolute function of
// affinity within each class, so an item's ratings agree across the users
// it suits and a barely-effective item never looks like a hit.
constexpr double kAffinityHigh = 3.2;
constexpr double kAffinityLow = -2.0;

constexpr std::uint64_t kQualityStream = stream_tag("item_quality");
constexpr std::uint64_t kItemFactorStream = stream_tag("item_factors");
constexpr std::uint64_t kUserFactorStream = stream_tag("user_factors");
constexpr std::uint64_t kCountStream = stream_tag("effective_count");
constexpr std::uint64_t kJitterStream = stream_tag("jitter");

}  // namespace

RatingMatrix generate_synthetic(const SyntheticSpec& spec) {
    const std::size_t m = spec.num_items;
    const std::size_t n = spec.num_users;
    if (m == 0 || n == 0) {
        throw ConfigError("synthetic spec needs at least one user and one item");
    }
    if (!(spec.target_effective_mean > 0.0) || spec.target_effective_mean >= static_cast<double>(m)) {
        throw ConfigError("target_effective_mean must lie in (0, m)");
    }
    if (spec.rating_noise_spread < 0.0) {
        throw ConfigError("rating_noise_spread must be nonnegative");
    }

    Rng quality_rng(stream_key(spec.seed, kQualityStream));
    Rng item_factor_rng(stream_key(spec.seed, kItemFactorStream));
    Rng user_factor_rng(stream_key(spec.seed, kUserFactorStream));

    std::vector<double> item_quality(m);
    for (auto& q : item_quality) q = quality_rng.normal();
    std::vector<double> item_factors(m * kLatentRank);
    for (auto& f : item_factors) f = item_factor_rng.normal();

    const double taste_weight = std::sqrt(1.0 - kGlobalWeight * kGlobalWeight) / std::sqrt(double(kLatentRank));
    const double effective_prob = spec.target_effective_mean / static_cast<double>(m);
    const double eta = kReferenceEta;
    const double below_eta = std::nextafter(eta, 0.0);

    std::vector<double> ratings(n * m);
    std::vector<double> affinity(m);
    std::vector<std::uint32_t> order(m);
    std::vector<double> user_factor(kLatentRank);

    for (std::size_t u = 0; u < n; ++u) {
        for (auto& f : user_factor) f = user_factor_rng.normal();
        for (std::size_t i = 0; i < m; ++i) {
            double taste = 0.0;
            const double* y = &item_factors[i * kLatentRank];
            for (int d = 0; d < kLatentRank; ++d) taste += user_factor[d] * y[d];
            affinity[i] = kGlobalWeight * item_quality[i] + taste_weight * taste;
        }

        // Effective count is Binomial(m, target/m): mean is exactly the target.
        Rng count_rng(stream_key(spec.seed, kCountStream, u));
        std::size_t num_effective = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (count_rng.bernoulli(effective_prob)) ++num_effective;
        }

        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(),
                  [&](std::uint32_t a, std::uint32_t b) { return affinity[a] > affinity[b]; });

        // Class boundary in affinity units; ratings then depend on affinity,
        // not on the within-user position.
        double boundary;
        if (num_effective == 0) {
            boundary = affinity[order[0]] + 0.1;
        } else if (num_effective == m) {
            boundary = affinity[order[m - 1]] - 0.1;
        } else {
            boundary = 0.5 * (affinity[order[num_effective - 1]] + affinity[order[num_effective]]);
        }
        const double high_span = std::max(kAffinityHigh - boundary, 0.25);
        const double low_span = std::max(boundary - kAffinityLow, 0.25);

        Rng jitter_rng(stream_key(spec.seed, kJitterStream, u));
        double* row = &ratings[u * m];
        for (std::size_t pos = 0; pos < m; ++pos) {
            const std::uint32_t item = order[pos];
            const double jitter = (jitter_rng.uniform() - 0.5) * 2.0 * spec.rating_noise_spread;
            if (pos < num_effective) {
                const double frac = std::clamp((affinity[item] - boundary) / high_span, 0.0, 1.0);
                row[item] = std::clamp(eta + (kMaxRating - eta) * frac + jitter, eta, kMaxRating);
            } else {
                const double frac = std::clamp((affinity[item] - kAffinityLow) / low_span, 0.0, 1.0);
                row[item] = std::clamp(kIneffectiveBandFraction * eta * frac + jitter,
                                       kMinRating, below_eta);
            }
        }
    }

    return RatingMatrix(n, m, std::move(ratings));
}

}  // namespace biad

#include "biad/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "biad/errors.hpp"

namespace biad {

ObservedRatings seed_initial_feedback(const RatingMatrix& truth, std::uint64_t seed) {
    const std::size_t m = truth.num_items();
    ObservedRatings observed(truth.num_users(), m);
    std::vector<std::uint32_t> items(m);
    for (std::size_t u = 0; u < truth.num_users(); ++u) {
        Rng rng(stream_key(seed, stream_tag("seed_feedback"), u));
        const double raw = rng.pareto(3.0, 3.0);
        const auto count = static_cast<std::size_t>(
            std::clamp(std::llround(raw), 1ll, static_cast<long long>(m)));
        // Partial Fisher-Yates: first `count` slots are a uniform sample
        // without replacement.
        std::iota(items.begin(), items.end(), 0u);
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t j = k + static_cast<std::size_t>(rng.below(m - k));
            std::swap(items[k], items[j]);
            observed.add(static_cast<int>(u), static_cast<int>(items[k]),
                         truth(u, items[k]));
        }
    }
    return observed;
}

Engine::Engine(const RatingMatrix& truth, double eta, EngineOptions options,
               std::vector<int> players, ObservedRatings initial)
    : truth_(truth),
      eta_(eta),
      options_(std::move(options)),
      players_(std::move(players)),
      observed_(std::move(initial)),
      estimate_(truth.num_users(), truth.num_items()),
      shown_(truth.num_users() * truth.num_items(), 0),
      shown_count_(truth.num_users(), 0),
      all_items_(static_cast<int>(truth.num_items())),
      rng_(stream_key(options_.seed, stream_tag("engine"))) {
    const auto m = static_cast<int>(truth_.num_items());
    if (options_.kind == EngineKind::kObjective) {
        if (!options_.ad_pool.empty() || options_.gamma != 0.0) {
            throw ConfigError("objective engine must have an empty ad-pool and gamma = 0");
        }
    } else {
        if (options_.ad_pool.empty()) {
            throw ConfigError("biased engine needs a nonempty ad-pool");
        }
    }
    if (options_.gamma < 0.0 || options_.gamma > 1.0) throw ConfigError("gamma must lie in [0, 1]");
    if (options_.explore_prob < 0.0 || options_.explore_prob > 1.0) {
        throw ConfigError("explore_prob must lie in [0, 1]");
    }
    if (options_.update_period < 1) throw ConfigError("update_period must be >= 1");
    for (int ad : options_.ad_pool) {
        if (ad < 0 || ad >= m) throw ConfigError("ad item " + std::to_string(ad) + " out of range");
    }
    if (observed_.num_users() != truth_.num_users() || observed_.num_items() != truth_.num_items()) {
        throw ConfigError("observed ratings shape does not match the truth matrix");
    }
    for (int player : players_) {
        if (player < 0 || static_cast<std::size_t>(player) >= truth_.num_users()) {
            throw ConfigError("player " + std::to_string(player) + " out of range");
        }
    }

    std::iota(all_items_.begin(), all_items_.end(), 0);
    // Seeded items behave as past interactions: never recommended again.
    for (std::size_t u = 0; u < truth_.num_users(); ++u) {
        for (const auto& [item, rating] : observed_.row(static_cast<int>(u))) {
            shown_[u * truth_.num_items() + static_cast<std::size_t>(item)] = 1;
            ++shown_count_[u];
        }
    }
    refit();
}

void Engine::refit() {
    if (options_.learner == LearnerKind::kMatrixFactorization) {
        MfOptions mf = options_.mf;
        mf.seed = stream_key(options_.seed, stream_tag("mf_fit"));
        mf.target_users = players_;
        estimate_ = fit_matrix_factorization(observed_, mf);
    } else {
        CfOptions cf;
        cf.neighborhood = options_.cf_neighborhood;
        cf.target_users = players_;
        estimate_ = fit_user_cf(observed_, cf);
    }
}

int pick_best_unshown(std::span<const double> scores, std::span<const char> shown,
                      std::span<const int> pool, Rng& rng) {
    double best = -1.0;
    int chosen = -1;
    std::uint64_t ties = 0;
    for (int i : pool) {
        if (shown[static_cast<std::size_t>(i)]) continue;
        const double v = scores[static_cast<std::size_t>(i)];
        if (v > best) {
            best = v;
            chosen = i;
            ties = 1;
        } else if (v == best) {
            // Reservoir pick keeps the choice uniform over the argmax set.
            if (rng.below(++ties) == 0) chosen = i;
        }
    }
    return chosen;
}

int pick_uniform_unshown(std::span<const char> shown, Rng& rng) {
    std::size_t unshown = 0;
    for (char s : shown) {
        if (!s) ++unshown;
    }
    if (unshown == 0) return -1;
    auto k = rng.below(unshown);
    for (std::size_t i = 0; i < shown.size(); ++i) {
        if (!shown[i] && k-- == 0) return static_cast<int>(i);
    }
    return -1;  // unreachable
}

int Engine::recommend_one(int player) {
    const auto u = static_cast<std::size_t>(player);
    if (shown_count_[u] >= static_cast<int>(truth_.num_items())) {
        throw ExhaustionError("all items already shown to player " + std::to_string(player));
    }
    const auto scores = estimate_.row(u);
    const auto shown = shown_row(player);

    const bool bias_coin = options_.kind == EngineKind::kBiased && rng_.bernoulli(options_.gamma);
    const bool explore_coin = rng_.bernoulli(options_.explore_prob);
    const bool ad_turn = options_.bias_before_explore ? bias_coin : (!explore_coin && bias_coin);
    const bool explore_turn = options_.bias_before_explore ? (!bias_coin && explore_coin) : explore_coin;

    int item = -1;
    if (ad_turn) {
        if (options_.ad_strategy == AdStrategy::kTopRanked) {
            item = pick_best_unshown(scores, shown, options_.ad_pool, rng_);
        } else {
            unshown_ads_.clear();
            for (int ad : options_.ad_pool) {
                if (!shown[static_cast<std::size_t>(ad)]) unshown_ads_.push_back(ad);
            }
            if (!unshown_ads_.empty()) {
                item = unshown_ads_[static_cast<std::size_t>(rng_.below(unshown_ads_.size()))];
            }
        }
        // Ad-pool exhausted for this player: behave like the objective arm.
        if (item < 0) item = pick_best_unshown(scores, shown, all_items_, rng_);
    } else if (explore_turn) {
        item = pick_uniform_unshown(shown, rng_);
    } else {
        item = pick_best_unshown(scores, shown, all_items_, rng_);
    }

    shown_[u * truth_.num_items() + static_cast<std::size_t>(item)] = 1;
    ++shown_count_[u];
    return item;
}

const FeedbackRecord& Engine::record_feedback(int round, int player, int item) {
    const double rating = truth_(static_cast<std::size_t>(player), static_cast<std::size_t>(item));
    log_.records.push_back({round, player, item, rating >= eta_, rating});
    observed_.add(player, item, rating);
    return log_.records.back();
}

std::span<const FeedbackRecord> Engine::run_round(int round) {
    if (round != last_round_ + 1) {
        throw ConfigError("rounds must be run in order: expected " +
                          std::to_string(last_round_ + 1) + ", got " + std::to_string(round));
    }
    last_round_ = round;
    if (round % options_.update_period == 0) refit();
    round_begin_ = log_.records.size();
    for (int player : players_) {
        const int item = recommend_one(player);
        record_feedback(round, player, item);
    }
    return {log_.records.data() + round_begin_, log_.records.size() - round_begin_};
}

}  // namespace biad

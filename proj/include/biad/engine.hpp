#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "biad/feedback.hpp"
#include "biad/learners.hpp"
#include "biad/rating_matrix.hpp"
#include "biad/rng.hpp"

namespace biad {

enum class EngineKind { kObjective, kBiased };
enum class LearnerKind { kMatrixFactorization, kUserCfPearson };

/// How a biased engine picks among its unshown ads.
enum class AdStrategy {
    kUniformRandom,  // uniform over the unshown ad-pool
    kTopRanked,      // unshown ad with the highest estimated rating
};

struct EngineOptions {
    EngineKind kind = EngineKind::kObjective;
    LearnerKind learner = LearnerKind::kMatrixFactorization;
    AdStrategy ad_strategy = AdStrategy::kUniformRandom;
    std::vector<int> ad_pool;        // empty iff objective
    double gamma = 0.0;              // bias probability
    double explore_prob = 0.1;
    int update_period = 5;           // rounds between learner refits
    bool bias_before_explore = false;
    int cf_neighborhood = 30;
    MfOptions mf;
    std::uint64_t seed = 0;
};

/// True iff the item's ground-truth rating for the user is at least eta.
inline bool is_effective(const RatingMatrix& truth, double eta, int user, int item) {
    return truth(static_cast<std::size_t>(user), static_cast<std::size_t>(item)) >= eta;
}

/// Highest-scoring unshown pool item. Ties are split uniformly at random:
/// the monotone recommendation model forces items with equal estimates to
/// carry equal weight, so a deterministic preference would be out of model.
/// Returns -1 when every pool item is already shown.
int pick_best_unshown(std::span<const double> scores, std::span<const char> shown,
                      std::span<const int> pool, Rng& rng);

/// Uniform unshown item, or -1 when everything is shown.
int pick_uniform_unshown(std::span<const char> shown, Rng& rng);

/// Initial sparse engine knowledge: per user, round(Pareto(scale 3, shape 3))
/// entries clamped to [1, m], items uniform without replacement, ratings
/// copied from the truth. Deterministic for a fixed seed.
ObservedRatings seed_initial_feedback(const RatingMatrix& truth, std::uint64_t seed);

/// A simulated recommendation engine over a fixed ground truth. Learns an
/// estimate from accumulated observations, recommends one unshown item per
/// player per round, and observes the true rating of whatever it showed.
/// Single-threaded; run independent trials on separate instances.
class Engine {
public:
    /// `players` are the users that will receive recommendations (the
    /// learner still trains on every user's observations). Seeded items
    /// count as already shown and are never recommended again.
    Engine(const RatingMatrix& truth, double eta, EngineOptions options,
           std::vector<int> players, ObservedRatings initial);

    /// Recommends one item to every player and records their feedback.
    /// Rounds are 1-based and must be called in order; the learner is refit
    /// before selection whenever round % update_period == 0 (and once at
    /// construction). Throws ExhaustionError when a player has no unshown
    /// item left.
    std::span<const FeedbackRecord> run_round(int round);

    /// Selection only, no feedback: with probability explore_prob a uniform
    /// unshown item; else (biased engines) with probability gamma an unshown
    /// ad per the strategy; else the unshown item with the highest estimated
    /// rating. Ties are split uniformly at random, matching the equal-weight
    /// requirement the monotone recommendation model places on ties.
    int recommend_one(int player);

    /// Looks up the truth, appends to the log and the engine's observations,
    /// and marks nothing (the item was marked shown at recommendation time).
    const FeedbackRecord& record_feedback(int round, int player, int item);

    const FeedbackLog& log() const noexcept { return log_; }
    const EstimateTable& estimate() const noexcept { return estimate_; }
    const ObservedRatings& observed() const noexcept { return observed_; }
    bool shown(int player, int item) const {
        return shown_[static_cast<std::size_t>(player) * truth_.num_items() +
                      static_cast<std::size_t>(item)] != 0;
    }

private:
    void refit();
    std::span<const char> shown_row(int player) const {
        return {shown_.data() + static_cast<std::size_t>(player) * truth_.num_items(),
                truth_.num_items()};
    }

    const RatingMatrix& truth_;
    double eta_;
    EngineOptions options_;
    std::vector<int> players_;
    ObservedRatings observed_;
    EstimateTable estimate_;
    FeedbackLog log_;
    std::vector<char> shown_;          // num_users x num_items
    std::vector<int> shown_count_;     // per user
    std::vector<int> all_items_;       // 0..m-1, greedy scan domain
    std::vector<int> unshown_ads_;     // scratch for uniform ad picks
    std::size_t round_begin_ = 0;      // log offset of the current round
    int last_round_ = 0;
    Rng rng_;
};

}  // namespace biad

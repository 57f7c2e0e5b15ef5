#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "biad/feedback.hpp"
#include "biad/rating_matrix.hpp"
#include "biad/threshold.hpp"

namespace biad {

/// Sequential-test parameters. The search-set size grows one item per
/// round (a_hat(t) = t); that schedule is part of the algorithm, not a knob.
struct DetectorParams {
    int q_max = 40;               // rounds before the bias hypothesis is rejected
    double c = 0.5;
    ThresholdVariant variant = ThresholdVariant::kFull;
    double f_tilde = 150.0;       // estimated average number of effective items
    int n_players = 100;
    std::size_t m = 2000;

    /// When set, p(t) is computed exactly from the truth in the noiseless
    /// case instead of the f_tilde approximation (validation runs only).
    const RatingMatrix* exact_truth = nullptr;
    double eta = 0.0;

    /// Throws ConfigError on inconsistent values (q_max < 1, q_max > f_tilde,
    /// q_max > m, n_players < 1, m < 2).
    void validate() const;
};

struct Verdict {
    bool biased = false;
    int round = 0;  // detection round when biased; q_max when not

    static Verdict biased_at(int round) { return {true, round}; }
    static Verdict not_biased(int q_max) { return {false, q_max}; }
    bool operator==(const Verdict&) const = default;
};

/// Streaming state of one detector run.
class DetectorState {
public:
    explicit DetectorState(const DetectorParams& params);

    int round() const noexcept { return round_; }
    std::span<const std::uint32_t> b_counts() const noexcept { return b_counts_; }
    std::span<const std::uint32_t> s_trace() const noexcept { return s_trace_; }
    std::span<const double> t_trace() const noexcept { return t_trace_; }

private:
    friend std::optional<Verdict> ingest_round(DetectorState&, std::span<const FeedbackRecord>,
                                               const DetectorParams&);
    std::vector<std::uint32_t> b_counts_;    // ineffective-vote count per item
    std::vector<char> seen_;                 // (player, item) freshness
    std::vector<char> seen_player_round_;    // player uniqueness within a round
    int round_ = 0;
    std::vector<std::uint32_t> s_trace_;
    std::vector<double> t_trace_;
};

/// Sum of the k largest values (partial selection, no full sort).
/// Throws std::invalid_argument unless 0 <= k <= counts.size().
std::uint64_t top_k_sum(std::span<const std::uint32_t> counts, int k);

/// Feeds one round of feedback. Increments the per-item ineffective counts,
/// evaluates the threshold chain at a_hat = t, and compares the statistic
/// S(t) = top_k_sum(B, t) against the threshold:
///   - returns a biased verdict when S(t) >= T(t),
///   - returns a not-biased verdict when t == q_max without a trigger,
///   - returns nothing otherwise.
/// Throws ProtocolError on round-number mismatch, duplicate (player, item)
/// pairs, repeated players within a round, or out-of-range indices.
std::optional<Verdict> ingest_round(DetectorState& state, std::span<const FeedbackRecord> records,
                                    const DetectorParams& params);

struct DetectionResult {
    Verdict verdict;
    std::vector<std::uint32_t> s_trace;
    std::vector<double> t_trace;
};

/// Runs the sequential test over a recorded log (records grouped by round,
/// rounds 1..q_max). Rounds after a trigger are ignored; a log that ends
/// before q_max without a trigger raises ProtocolError.
DetectionResult run_biad(const FeedbackLog& log, const DetectorParams& params);

/// Baseline one-shot test: the engine is declared biased iff the mean
/// ground-truth rating across all recommendations is below tau. Needs a
/// rated log (simulator-side); throws std::invalid_argument when the log is
/// empty or lacks ratings.
Verdict basic_average_test(std::span<const FeedbackRecord> records, double tau);

/// Mean rating across records (the baseline's statistic).
double mean_log_rating(std::span<const FeedbackRecord> records);

/// Trace CSV: header "round,S,T,triggered".
void save_trace(const DetectionResult& result, const std::filesystem::path& path);

}  // namespace biad

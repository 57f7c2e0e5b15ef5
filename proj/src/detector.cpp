#include "biad/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "biad/errors.hpp"

namespace biad {

void DetectorParams::validate() const {
    if (q_max < 1) throw ConfigError("q_max must be >= 1");
    if (m < 2) throw ConfigError("m must be >= 2");
    if (n_players < 1) throw ConfigError("n_players must be >= 1");
    if (static_cast<std::size_t>(q_max) > m) {
        throw ConfigError("q_max exceeds the item count");
    }
    if (exact_truth == nullptr && static_cast<double>(q_max) > f_tilde) {
        throw ConfigError("q_max " + std::to_string(q_max) + " exceeds f_tilde " +
                          std::to_string(f_tilde));
    }
    if (!(c > 0.0)) throw ConfigError("c must be positive");
}

DetectorState::DetectorState(const DetectorParams& params)
    : b_counts_(params.m, 0),
      seen_(static_cast<std::size_t>(params.n_players) * params.m, 0),
      seen_player_round_(static_cast<std::size_t>(params.n_players), 0) {
    params.validate();
}

std::uint64_t top_k_sum(std::span<const std::uint32_t> counts, int k) {
    if (k < 0 || static_cast<std::size_t>(k) > counts.size()) {
        throw std::invalid_argument("top_k_sum: k must lie in [0, size]");
    }
    if (k == 0) return 0;
    if (static_cast<std::size_t>(k) == counts.size()) {
        std::uint64_t total = 0;
        for (auto v : counts) total += v;
        return total;
    }
    std::vector<std::uint32_t> scratch(counts.begin(), counts.end());
    std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end(),
                     std::greater<>());
    std::uint64_t total = 0;
    for (int i = 0; i < k; ++i) total += scratch[static_cast<std::size_t>(i)];
    return total;
}

std::optional<Verdict> ingest_round(DetectorState& state, std::span<const FeedbackRecord> records,
                                    const DetectorParams& params) {
    const int t = state.round_ + 1;
    if (t > params.q_max) {
        throw ProtocolError("feedback after round q_max = " + std::to_string(params.q_max));
    }
    std::fill(state.seen_player_round_.begin(), state.seen_player_round_.end(), 0);
    for (const auto& rec : records) {
        if (rec.round != t) {
            throw ProtocolError("record carries round " + std::to_string(rec.round) +
                                " during round " + std::to_string(t));
        }
        if (rec.player < 0 || rec.player >= params.n_players) {
            throw ProtocolError("player " + std::to_string(rec.player) + " out of range");
        }
        if (rec.item < 0 || static_cast<std::size_t>(rec.item) >= params.m) {
            throw ProtocolError("item " + std::to_string(rec.item) + " out of range");
        }
        if (state.seen_player_round_[static_cast<std::size_t>(rec.player)]) {
            throw ProtocolError("player " + std::to_string(rec.player) +
                                " has two records in round " + std::to_string(t));
        }
        state.seen_player_round_[static_cast<std::size_t>(rec.player)] = 1;
        auto& fresh = state.seen_[static_cast<std::size_t>(rec.player) * params.m +
                                  static_cast<std::size_t>(rec.item)];
        if (fresh) {
            throw ProtocolError("duplicate (player " + std::to_string(rec.player) + ", item " +
                                std::to_string(rec.item) + ") in the log");
        }
        fresh = 1;
        if (!rec.effective) {
            ++state.b_counts_[static_cast<std::size_t>(rec.item)];
        }
    }
    state.round_ = t;

    const double p = params.exact_truth != nullptr
                         ? exact_p_noiseless(t, t, *params.exact_truth, params.eta, params.n_players)
                         : approx_p(t, t, params.n_players, params.f_tilde);
    const auto chain = build_threshold(t, p, params.m, params.c, params.variant);
    const std::uint64_t statistic = top_k_sum(state.b_counts_, t);
    state.s_trace_.push_back(static_cast<std::uint32_t>(statistic));
    state.t_trace_.push_back(chain.threshold);

    if (static_cast<double>(statistic) >= chain.threshold) {
        return Verdict::biased_at(t);
    }
    if (t == params.q_max) {
        return Verdict::not_biased(params.q_max);
    }
    return std::nullopt;
}

DetectionResult run_biad(const FeedbackLog& log, const DetectorParams& params) {
    params.validate();
    // Bucket records by round; rounds must form 1..k with no gaps.
    std::vector<std::vector<FeedbackRecord>> by_round;
    for (const auto& rec : log.records) {
        if (rec.round < 1) throw ProtocolError("round numbers start at 1");
        if (static_cast<std::size_t>(rec.round) > by_round.size()) {
            by_round.resize(static_cast<std::size_t>(rec.round));
        }
        by_round[static_cast<std::size_t>(rec.round - 1)].push_back(rec);
    }

    DetectorState state(params);
    for (const auto& round_records : by_round) {
        const auto verdict = ingest_round(state, round_records, params);
        if (verdict.has_value()) {
            return {*verdict,
                    {state.s_trace().begin(), state.s_trace().end()},
                    {state.t_trace().begin(), state.t_trace().end()}};
        }
    }
    throw ProtocolError("incomplete log: covers " + std::to_string(by_round.size()) +
                        " rounds without a verdict, q_max = " + std::to_string(params.q_max));
}

double mean_log_rating(std::span<const FeedbackRecord> records) {
    if (records.empty()) {
        throw std::invalid_argument("basic average test needs a nonempty log");
    }
    double sum = 0.0;
    for (const auto& rec : records) {
        if (!std::isfinite(rec.rating)) {
            throw std::invalid_argument("basic average test needs a rated log");
        }
        sum += rec.rating;
    }
    return sum / static_cast<double>(records.size());
}

Verdict basic_average_test(std::span<const FeedbackRecord> records, double tau) {
    const double mean = mean_log_rating(records);
    int last_round = 0;
    for (const auto& rec : records) last_round = std::max(last_round, rec.round);
    // Low average means the stream is dominated by ineffective promotions.
    return mean < tau ? Verdict::biased_at(last_round) : Verdict::not_biased(last_round);
}

void save_trace(const DetectionResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    out << "round,S,T,triggered\n";
    char buf[64];
    for (std::size_t i = 0; i < result.s_trace.size(); ++i) {
        const bool triggered = result.verdict.biased && static_cast<int>(i + 1) == result.verdict.round;
        const int written = std::snprintf(buf, sizeof buf, "%zu,%u,%.6f,%d\n", i + 1,
                                          result.s_trace[i], result.t_trace[i], triggered ? 1 : 0);
        out.write(buf, written);
    }
}

}  // namespace biad

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biad/detector.hpp"
#include "biad/engine.hpp"
#include "biad/synthetic.hpp"

namespace biad {

/// Everything a trial needs: matrix source, engine setup, detector setup,
/// and seeding. One config describes a matched (objective, biased) pair;
/// error-rate estimation runs both sides.
struct TrialConfig {
    // Matrix source: a file path wins over the synthetic spec when set.
    std::string matrix_file;
    SyntheticSpec synthetic;

    double eta = kReferenceEta;

    LearnerKind learner = LearnerKind::kMatrixFactorization;
    AdStrategy ad_strategy = AdStrategy::kUniformRandom;
    int ad_pool_size = 8;       // A
    double gamma = 0.45;
    double explore_prob = 0.1;
    int update_period = 5;
    bool bias_before_explore = false;
    /// Ads are drawn from items ineffective for at least this fraction of
    /// users, so the pool systematically fights user preferences.
    double ad_ineffective_min_frac = 0.8;
    int cf_neighborhood = 30;
    MfOptions mf;

    int q_max = 40;
    ThresholdVariant variant = ThresholdVariant::kFull;
    double f_tilde = 150.0;
    double c = 0.5;

    int n_players = 100;
    std::uint64_t master_seed = 1;
    int num_trials = 50;

    DetectorParams detector_params(std::size_t m) const;
};

/// Matrix and ad-pool candidates resolved once per config and shared
/// read-only across the trials of a sweep point.
class ExperimentContext {
public:
    static ExperimentContext resolve(const TrialConfig& config);

    const RatingMatrix& matrix() const noexcept { return matrix_; }
    std::span<const int> ad_candidates() const noexcept { return ad_candidates_; }
    double true_mean_effective() const noexcept { return true_mean_effective_; }

private:
    ExperimentContext(RatingMatrix matrix, std::vector<int> candidates, double mean_eff)
        : matrix_(std::move(matrix)),
          ad_candidates_(std::move(candidates)),
          true_mean_effective_(mean_eff) {}

    RatingMatrix matrix_;
    std::vector<int> ad_candidates_;
    double true_mean_effective_;
};

struct TrialOutcome {
    Verdict verdict;
    std::vector<std::uint32_t> s_trace;
    std::vector<double> t_trace;
    double mean_rating = 0.0;  // baseline statistic over the players' stream
};

/// Simulation half of a trial: seeds the engine and runs q_max rounds for
/// players 0..n-1, returning the rated feedback stream. The stream depends
/// only on (config's simulation fields, kind, trial_index), never on
/// detector parameters.
FeedbackLog simulate_trial(const TrialConfig& config, const ExperimentContext& context,
                           EngineKind kind, int trial_index);

/// Runs one seeded trial: seeds the engine, simulates q_max rounds for
/// players 0..n-1 (engine kind per `kind`), then replays the binary
/// feedback through the sequential test. Deterministic per
/// (config, trial_index).
TrialOutcome run_trial(const TrialConfig& config, const ExperimentContext& context,
                       EngineKind kind, int trial_index);

/// Convenience overload that resolves the context itself.
TrialOutcome run_trial(const TrialConfig& config, EngineKind kind, int trial_index);

struct ErrorRates {
    double type_i = 0.0;   // objective trials declared biased
    double type_ii = 0.0;  // biased trials not detected within q_max
    double ci_i = 0.0;     // Wilson 95% half-widths
    double ci_ii = 0.0;
    double mean_detection_round = 0.0;  // over detected biased trials; NaN if none
    int trials = 0;
};

/// Runs num_trials matched objective/biased pairs and aggregates.
ErrorRates estimate_error_rates(const TrialConfig& config, const ExperimentContext& context,
                                int num_trials, int workers);
ErrorRates estimate_error_rates(const TrialConfig& config, int num_trials, int workers);

struct SweepResult {
    std::string param;
    std::vector<double> values;
    std::vector<ErrorRates> rates;  // one per value
};

/// Parameter names run_sweep accepts.
std::span<const std::string_view> sweep_parameter_names();

/// One estimate_error_rates evaluation per value, matched master seed across
/// values. "tau" sweeps the baseline average test instead of the sequential
/// detector (one shared set of simulations, thresholded per value).
/// Throws std::invalid_argument for unknown parameter names.
SweepResult run_sweep(const TrialConfig& config, const std::string& param,
                      std::span<const double> values, int workers);

/// CSV per the harness interface:
/// param,value,type_i,type_ii,ci_i,ci_ii,mean_detect_round,trials
void save_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

/// Wilson 95% half-width for k successes in n draws.
double wilson_half_width(int successes, int trials);

/// Deterministic worker pool: applies fn to 0..count-1 on `workers` threads;
/// results must be written into per-index slots by the caller.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace biad

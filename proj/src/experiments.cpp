#include "biad/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "biad/errors.hpp"
#include "biad/matrix_io.hpp"

namespace biad {

namespace {

constexpr std::uint64_t kSeedFeedbackStream = stream_tag("trial_seed_feedback");
constexpr std::uint64_t kEngineStream = stream_tag("trial_engine");
constexpr std::uint64_t kAdPoolStream = stream_tag("trial_ad_pool");

constexpr std::string_view kSweepParams[] = {"q_max",   "n_players", "m",   "A",
                                             "gamma",   "f_tilde",   "tau", "explore_prob"};

}  // namespace

DetectorParams TrialConfig::detector_params(std::size_t m) const {
    DetectorParams params;
    params.q_max = q_max;
    params.c = c;
    params.variant = variant;
    params.f_tilde = f_tilde;
    params.n_players = n_players;
    params.m = m;
    return params;
}

ExperimentContext ExperimentContext::resolve(const TrialConfig& config) {
    RatingMatrix matrix = config.matrix_file.empty() ? generate_synthetic(config.synthetic)
                                                     : load_matrix(config.matrix_file);
    if (config.n_players < 1 ||
        static_cast<std::size_t>(config.n_players) > matrix.num_users()) {
        throw ConfigError("n_players must lie in [1, num_users]");
    }
    if (config.ad_pool_size < 1 ||
        static_cast<std::size_t>(config.ad_pool_size) > matrix.num_items()) {
        throw ConfigError("ad pool size must lie in [1, m]");
    }

    // Ad candidates: items ineffective for at least the configured fraction
    // of users, so a biased engine pushes items users mostly dislike.
    const std::size_t n = matrix.num_users();
    const std::size_t m = matrix.num_items();
    std::vector<std::uint32_t> ineffective_users(m, 0);
    double total_effective = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        const auto row = matrix.row(u);
        for (std::size_t i = 0; i < m; ++i) {
            if (row[i] < config.eta) ++ineffective_users[i];
        }
        total_effective += static_cast<double>(effective_count(matrix, u, config.eta));
    }
    std::vector<int> candidates;
    const double min_frac = config.ad_ineffective_min_frac;
    for (std::size_t i = 0; i < m; ++i) {
        if (static_cast<double>(ineffective_users[i]) >= min_frac * static_cast<double>(n)) {
            candidates.push_back(static_cast<int>(i));
        }
    }
    if (candidates.size() < static_cast<std::size_t>(config.ad_pool_size)) {
        throw ConfigError("only " + std::to_string(candidates.size()) +
                          " ad candidates are ineffective for >= " +
                          std::to_string(min_frac * 100.0) + "% of users, need " +
                          std::to_string(config.ad_pool_size));
    }
    return ExperimentContext(std::move(matrix), std::move(candidates),
                             total_effective / static_cast<double>(n));
}

FeedbackLog simulate_trial(const TrialConfig& config, const ExperimentContext& context,
                           EngineKind kind, int trial_index) {
    const auto& matrix = context.matrix();
    const auto trial = static_cast<std::uint64_t>(trial_index);

    EngineOptions options;
    options.kind = kind;
    options.learner = config.learner;
    options.ad_strategy = config.ad_strategy;
    options.gamma = kind == EngineKind::kBiased ? config.gamma : 0.0;
    options.explore_prob = config.explore_prob;
    options.update_period = config.update_period;
    options.bias_before_explore = config.bias_before_explore;
    options.cf_neighborhood = config.cf_neighborhood;
    options.mf = config.mf;
    options.seed = stream_key(config.master_seed, kEngineStream, trial);

    if (kind == EngineKind::kBiased) {
        Rng pool_rng(stream_key(config.master_seed, kAdPoolStream, trial));
        std::vector<int> pool(context.ad_candidates().begin(), context.ad_candidates().end());
        for (int k = 0; k < config.ad_pool_size; ++k) {
            const auto j = static_cast<std::size_t>(k) +
                           static_cast<std::size_t>(pool_rng.below(pool.size() - static_cast<std::size_t>(k)));
            std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
        }
        pool.resize(static_cast<std::size_t>(config.ad_pool_size));
        options.ad_pool = std::move(pool);
    }

    std::vector<int> players(static_cast<std::size_t>(config.n_players));
    std::iota(players.begin(), players.end(), 0);

    ObservedRatings seeds = seed_initial_feedback(
        matrix, stream_key(config.master_seed, kSeedFeedbackStream, trial));

    Engine engine(matrix, config.eta, std::move(options), std::move(players), std::move(seeds));
    for (int round = 1; round <= config.q_max; ++round) {
        engine.run_round(round);
    }
    return engine.log();
}

TrialOutcome run_trial(const TrialConfig& config, const ExperimentContext& context,
                       EngineKind kind, int trial_index) {
    const FeedbackLog log = simulate_trial(config, context, kind, trial_index);

    const DetectorParams params = config.detector_params(context.matrix().num_items());
    DetectionResult detection = run_biad(log, params);

    TrialOutcome outcome;
    outcome.verdict = detection.verdict;
    outcome.s_trace = std::move(detection.s_trace);
    outcome.t_trace = std::move(detection.t_trace);
    outcome.mean_rating = mean_log_rating(log.records);
    return outcome;
}

TrialOutcome run_trial(const TrialConfig& config, EngineKind kind, int trial_index) {
    const auto context = ExperimentContext::resolve(config);
    return run_trial(config, context, kind, trial_index);
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

double wilson_half_width(int successes, int trials) {
    if (trials <= 0) return 0.0;
    const double z = 1.959963984540054;  // 97.5% normal quantile
    const double n = trials;
    const double k = successes;
    return z * std::sqrt(k * (n - k) / n + z * z / 4.0) / (n + z * z);
}

namespace {

ErrorRates aggregate_rates(std::span<const Verdict> objective, std::span<const Verdict> biased) {
    ErrorRates rates;
    rates.trials = static_cast<int>(objective.size());
    int false_positives = 0;
    for (const auto& v : objective) {
        if (v.biased) ++false_positives;
    }
    int missed = 0;
    int detected = 0;
    double round_sum = 0.0;
    for (const auto& v : biased) {
        if (!v.biased) {
            ++missed;
        } else {
            ++detected;
            round_sum += v.round;
        }
    }
    const double n = static_cast<double>(rates.trials);
    rates.type_i = false_positives / n;
    rates.type_ii = missed / n;
    rates.ci_i = wilson_half_width(false_positives, rates.trials);
    rates.ci_ii = wilson_half_width(missed, rates.trials);
    rates.mean_detection_round =
        detected > 0 ? round_sum / detected : std::numeric_limits<double>::quiet_NaN();
    return rates;
}

}  // namespace

ErrorRates estimate_error_rates(const TrialConfig& config, const ExperimentContext& context,
                                int num_trials, int workers) {
    if (num_trials < 1) throw ConfigError("num_trials must be >= 1");
    std::vector<Verdict> objective(static_cast<std::size_t>(num_trials));
    std::vector<Verdict> biased(static_cast<std::size_t>(num_trials));
    // Even tasks run the objective twin, odd tasks the biased twin.
    parallel_for(2 * num_trials, workers, [&](int task) {
        const int trial = task / 2;
        const EngineKind kind = task % 2 == 0 ? EngineKind::kObjective : EngineKind::kBiased;
        const TrialOutcome outcome = run_trial(config, context, kind, trial);
        (kind == EngineKind::kObjective ? objective : biased)[static_cast<std::size_t>(trial)] =
            outcome.verdict;
    });
    return aggregate_rates(objective, biased);
}

ErrorRates estimate_error_rates(const TrialConfig& config, int num_trials, int workers) {
    const auto context = ExperimentContext::resolve(config);
    return estimate_error_rates(config, context, num_trials, workers);
}

std::span<const std::string_view> sweep_parameter_names() { return kSweepParams; }

namespace {

ErrorRates baseline_rates(double tau, std::span<const double> objective_means,
                          std::span<const double> biased_means) {
    const int n = static_cast<int>(objective_means.size());
    int false_positives = 0;
    for (double mean : objective_means) {
        if (mean < tau) ++false_positives;
    }
    int missed = 0;
    for (double mean : biased_means) {
        if (mean >= tau) ++missed;
    }
    ErrorRates rates;
    rates.trials = n;
    rates.type_i = static_cast<double>(false_positives) / n;
    rates.type_ii = static_cast<double>(missed) / n;
    rates.ci_i = wilson_half_width(false_positives, n);
    rates.ci_ii = wilson_half_width(missed, n);
    rates.mean_detection_round = std::numeric_limits<double>::quiet_NaN();
    return rates;
}

}  // namespace

SweepResult run_sweep(const TrialConfig& config, const std::string& param,
                      std::span<const double> values, int workers) {
    const auto known = sweep_parameter_names();
    if (std::find(known.begin(), known.end(), param) == known.end()) {
        std::string names;
        for (const auto& name : known) {
            if (!names.empty()) names += ", ";
            names += name;
        }
        throw std::invalid_argument("unknown sweep parameter '" + param + "'; supported: " + names);
    }
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");

    SweepResult result;
    result.param = param;
    result.values.assign(values.begin(), values.end());

    if (param == "tau") {
        // One shared simulation set; every tau thresholds the same means.
        const auto context = ExperimentContext::resolve(config);
        const int n = config.num_trials;
        std::vector<double> objective_means(static_cast<std::size_t>(n));
        std::vector<double> biased_means(static_cast<std::size_t>(n));
        parallel_for(2 * n, workers, [&](int task) {
            const int trial = task / 2;
            const EngineKind kind = task % 2 == 0 ? EngineKind::kObjective : EngineKind::kBiased;
            const FeedbackLog log = simulate_trial(config, context, kind, trial);
            const double mean = mean_log_rating(log.records);
            (kind == EngineKind::kObjective ? objective_means
                                            : biased_means)[static_cast<std::size_t>(trial)] = mean;
        });
        for (double tau : values) {
            result.rates.push_back(baseline_rates(tau, objective_means, biased_means));
        }
        return result;
    }

    const bool needs_new_matrix = param == "m";
    std::optional<ExperimentContext> shared;
    if (!needs_new_matrix) shared.emplace(ExperimentContext::resolve(config));

    for (double value : values) {
        TrialConfig point = config;
        if (param == "q_max") {
            point.q_max = static_cast<int>(value);
        } else if (param == "n_players") {
            point.n_players = static_cast<int>(value);
        } else if (param == "m") {
            point.synthetic.num_items = static_cast<std::size_t>(value);
        } else if (param == "A") {
            point.ad_pool_size = static_cast<int>(value);
        } else if (param == "gamma") {
            point.gamma = value;
        } else if (param == "f_tilde") {
            point.f_tilde = value;
        } else if (param == "explore_prob") {
            point.explore_prob = value;
        }
        if (needs_new_matrix) shared.emplace(ExperimentContext::resolve(point));
        result.rates.push_back(estimate_error_rates(point, *shared, point.num_trials, workers));
    }
    return result;
}

void save_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    out << "param,value,type_i,type_ii,ci_i,ci_ii,mean_detect_round,trials\n";
    char buf[256];
    for (std::size_t i = 0; i < result.values.size(); ++i) {
        const auto& r = result.rates[i];
        const int written =
            std::snprintf(buf, sizeof buf, "%s,%g,%.6f,%.6f,%.6f,%.6f,%.6f,%d\n",
                          result.param.c_str(), result.values[i], r.type_i, r.type_ii, r.ci_i,
                          r.ci_ii, r.mean_detection_round, r.trials);
        out.write(buf, written);
    }
    if (!out) {
        throw ParseError("write to '" + path.string() + "' failed");
    }
}

}  // namespace biad

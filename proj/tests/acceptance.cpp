// Acceptance suite: runs every release criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.
//
// The statistical criteria (6-11) run at the frozen desk-scale setup:
// synthetic matrix m=2000, 500 users, mean effective count ~150 at eta=7,
// n=100 players, Q=40 rounds, c=1/2.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "biad/detector.hpp"
#include "biad/engine.hpp"
#include "biad/experiments.hpp"
#include "biad/lambert.hpp"
#include "biad/rng.hpp"
#include "biad/synthetic.hpp"
#include "biad/threshold.hpp"
#include "support/oracles.hpp"

using namespace biad;

namespace {

int g_failures = 0;
int g_criterion = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(bool pass, const std::string& what, const std::string& detail, double seconds) {
    ++g_criterion;
    if (!pass) ++g_failures;
    std::printf("[%2d/11] %s  %s  (%s) [%.1fs]\n", g_criterion, pass ? "PASS" : "FAIL",
                what.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
}

int workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 2 : static_cast<int>(hw);
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

void criterion_lambert() {
    Timer timer;
    double worst = 0.0;
    auto residual = [](double z) {
        const double w = lambert_w0(z);
        return std::abs(w * std::exp(w) - z) / std::max(1.0, z);
    };
    worst = std::max(worst, residual(0.0));
    for (int k = -6; k <= 6; ++k) worst = std::max(worst, residual(std::pow(10.0, k)));
    const double elapsed = timer.seconds();
    report(worst <= 1e-12 && elapsed < 1.0, "lambert-w residual on z in {0} u {10^k, k=-6..6}",
           fmt("max residual %.2e, budget 1e-12", worst), elapsed);
}

// ---------------------------------------------------------------- criterion 2

void criterion_threshold_identities() {
    Timer timer;
    Rng rng(stream_key(2026, stream_tag("acceptance_chains")));
    double worst = 0.0;
    bool prime_exact = true;
    for (int i = 0; i < 1000; ++i) {
        const int a_hat = 1 + static_cast<int>(rng.below(50));
        const auto m = static_cast<std::size_t>(2 + rng.below(1000000));
        const double c = 0.1 + 1.9 * rng.uniform();
        const double budget = (a_hat + c) * std::log(static_cast<double>(m));
        const double p = budget * std::exp(-3.0 + 4.2 * rng.uniform());
        const auto full = build_threshold(a_hat, p, m, c, ThresholdVariant::kFull);
        const auto prime = build_threshold(a_hat, p, m, c, ThresholdVariant::kPrime);
        const double y = full.p_hat / full.p;
        const double x = full.threshold / full.p_hat;
        worst = std::max(worst, std::abs(y * (std::log(y) - 1.0) - full.beta) /
                                    std::max(1.0, std::abs(full.beta)));
        worst = std::max(worst, std::abs(x * (std::log(x) - 1.0) - full.beta_hat) /
                                    std::max(1.0, std::abs(full.beta_hat)));
        prime_exact = prime_exact && prime.threshold == prime.p_hat;
    }
    const double elapsed = timer.seconds();
    report(worst <= 1e-9 && prime_exact && elapsed < 5.0,
           "threshold chain identities on 1000 random chains",
           fmt("max identity defect %.2e (tol 1e-9), prime==p_hat %s", worst,
               prime_exact ? "exact" : "VIOLATED"),
           elapsed);
}

// ---------------------------------------------------------------- criterion 3

void criterion_oracle_equivalence() {
    Timer timer;
    Rng rng(stream_key(2026, stream_tag("acceptance_oracles")));
    bool top_k_ok = true;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::uint32_t> values(1 + rng.below(12));
        for (auto& v : values) v = static_cast<std::uint32_t>(rng.below(100));
        const int k = static_cast<int>(rng.below(std::min<std::uint64_t>(values.size(), 6) + 1));
        top_k_ok = top_k_ok && static_cast<double>(top_k_sum(values, k)) ==
                                   testing::brute_force_top_k<std::uint32_t>(values, k);
    }
    double worst_p_defect = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = static_cast<std::size_t>(2 + rng.below(11));
        const auto n = static_cast<std::size_t>(1 + rng.below(4));
        std::vector<double> values(n * m);
        for (auto& v : values) v = 10.0 * rng.uniform();
        const RatingMatrix matrix(n, m, std::move(values));
        const double eta = 2.0 + 6.0 * rng.uniform();
        const int t = 1 + static_cast<int>(rng.below(3));
        const int a_hat = 1 + static_cast<int>(rng.below(std::min<std::uint64_t>(3, m)));
        const int players = 1 + static_cast<int>(rng.below(n));
        const double got = exact_p_noiseless(t, a_hat, matrix, eta, players);
        const double want = testing::brute_force_exact_p(t, a_hat, matrix, eta, players);
        worst_p_defect =
            std::max(worst_p_defect, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
    const double elapsed = timer.seconds();
    // Equality for the subset maxima is exact up to summation order: 1e-12
    // relative covers the float reassociation between the two routes.
    report(top_k_ok && worst_p_defect <= 1e-12 && elapsed < 30.0,
           "top-k and noiseless-p oracle equivalence (500 + 200 cases)",
           fmt("top-k exact %s, max p defect %.2e", top_k_ok ? "yes" : "NO", worst_p_defect),
           elapsed);
}

// ---------------------------------------------------------------- criterion 4

void criterion_chernoff() {
    Timer timer;
    Rng rng(stream_key(2026, stream_tag("acceptance_chernoff")));
    const int draws = 100000;
    bool ok = true;
    double worst_margin = -1e9;
    for (int config = 0; config < 20; ++config) {
        const int k = 20 + static_cast<int>(rng.below(181));
        std::vector<double> probs(static_cast<std::size_t>(k));
        double p = 0.0;
        for (auto& q : probs) {
            q = 0.25 * rng.uniform();
            p += q;
        }
        const double threshold = p * (1.2 + 1.6 * rng.uniform());
        const double bound = chernoff_tail_bound(p, threshold);
        int hits = 0;
        for (int d = 0; d < draws; ++d) {
            int sum = 0;
            for (const double q : probs) sum += rng.bernoulli(q) ? 1 : 0;
            if (static_cast<double>(sum) >= threshold) ++hits;
        }
        const double freq = static_cast<double>(hits) / draws;
        const double sigma = std::sqrt(bound * (1.0 - bound) / draws);
        const double margin = freq - (bound + 3.0 * sigma);
        worst_margin = std::max(worst_margin, margin);
        ok = ok && margin <= 0.0;
    }
    const double elapsed = timer.seconds();
    report(ok && elapsed < 60.0, "chernoff tail bound vs monte-carlo (20 configs x 100k draws)",
           fmt("worst freq-(bound+3sigma) = %.2e", worst_margin), elapsed);
}

// ---------------------------------------------------------------- criterion 5

void criterion_rank_bound() {
    Timer timer;
    const int m = 60;
    std::vector<double> ratings(m);
    Rng setup(stream_key(2026, stream_tag("acceptance_lemma_setup")));
    for (auto& r : ratings) r = 10.0 * setup.uniform();

    const int draws = 100000;
    const int rounds = 5;
    bool ok = true;
    double worst_margin = -1e9;
    for (const int top_k : {1, 5, 20}) {
        std::vector<std::vector<int>> hits(static_cast<std::size_t>(rounds),
                                           std::vector<int>(static_cast<std::size_t>(m), 0));
        Rng rng(stream_key(2026, stream_tag("acceptance_lemma"), static_cast<std::uint64_t>(top_k)));
        for (int d = 0; d < draws; ++d) {
            const auto picks = testing::simulate_top_k_policy(ratings, top_k, rounds, rng);
            for (int t = 0; t < rounds; ++t) {
                ++hits[static_cast<std::size_t>(t)]
                      [static_cast<std::size_t>(picks[static_cast<std::size_t>(t)])];
            }
        }
        for (const int t : {1, 3, 5}) {
            for (int i = 0; i < m; ++i) {
                const auto rank = static_cast<int>(
                    count_at_least(ratings[static_cast<std::size_t>(i)], ratings));
                if (t >= rank + 1) continue;
                const double bound = 1.0 / static_cast<double>(rank - t + 1);
                const double freq = static_cast<double>(hits[static_cast<std::size_t>(t - 1)]
                                                            [static_cast<std::size_t>(i)]) /
                                    draws;
                const double sigma = std::sqrt(bound * (1.0 - bound) / draws);
                const double margin = freq - (bound + 3.0 * sigma);
                worst_margin = std::max(worst_margin, margin);
                ok = ok && margin <= 0.0;
            }
        }
    }
    const double elapsed = timer.seconds();
    report(ok && elapsed < 120.0,
           "objective rank bound, softened top-K policy (100k draws, t in {1,3,5}, K in {1,5,20})",
           fmt("worst freq-(1/(rank-t+1)+3sigma) = %.2e", worst_margin), elapsed);
}

// --------------------------------------------------------- desk-scale setup

TrialConfig desk_config() {
    TrialConfig config;
    config.synthetic.num_items = 2000;
    config.synthetic.num_users = 500;
    config.synthetic.target_effective_mean = 150.0;
    config.synthetic.seed = 42;
    config.eta = kReferenceEta;
    config.f_tilde = 150.0;
    config.q_max = 40;
    config.n_players = 100;
    config.ad_pool_size = 8;
    config.gamma = 0.45;
    config.master_seed = 2026;
    config.num_trials = 50;
    return config;
}

// ---------------------------------------------------------------- criterion 6

void criterion_type_i() {
    Timer timer;
    TrialConfig config = desk_config();
    const auto context = ExperimentContext::resolve(config);
    std::string detail;
    bool ok = true;
    for (const auto learner : {LearnerKind::kMatrixFactorization, LearnerKind::kUserCfPearson}) {
        config.learner = learner;
        std::vector<int> fp(static_cast<std::size_t>(config.num_trials), 0);
        parallel_for(config.num_trials, workers(), [&](int trial) {
            const auto outcome = run_trial(config, context, EngineKind::kObjective, trial);
            fp[static_cast<std::size_t>(trial)] = outcome.verdict.biased ? 1 : 0;
        });
        int total = 0;
        for (int f : fp) total += f;
        const double rate = static_cast<double>(total) / config.num_trials;
        ok = ok && rate <= 0.05;
        detail += fmt("%s type-I %.2f (%d/%d); ",
                      learner == LearnerKind::kMatrixFactorization ? "MF" : "CF", rate, total,
                      config.num_trials);
    }
    const double elapsed = timer.seconds();
    report(ok && elapsed < 600.0, "type-I error at desk scale, full threshold, both learners",
           detail + "tolerance 0.05", elapsed);
}

// ---------------------------------------------------------------- criterion 7

void criterion_detection() {
    Timer timer;
    TrialConfig config = desk_config();
    config.learner = LearnerKind::kUserCfPearson;
    config.ad_strategy = AdStrategy::kUniformRandom;
    config.variant = ThresholdVariant::kPrime;
    const auto context = ExperimentContext::resolve(config);
    std::vector<int> round(static_cast<std::size_t>(config.num_trials), -1);
    parallel_for(config.num_trials, workers(), [&](int trial) {
        const auto outcome = run_trial(config, context, EngineKind::kBiased, trial);
        round[static_cast<std::size_t>(trial)] = outcome.verdict.biased ? outcome.verdict.round : -1;
    });
    int detected = 0;
    double round_sum = 0.0;
    for (int r : round) {
        if (r > 0) {
            ++detected;
            round_sum += r;
        }
    }
    const double rate = static_cast<double>(detected) / config.num_trials;
    const double mean_round = detected > 0 ? round_sum / detected : 1e9;
    const double elapsed = timer.seconds();
    report(rate >= 0.9 && mean_round <= 12.0,
           "detection of a biased engine (A=8, gamma=0.45, A1, prime threshold)",
           fmt("detected %.0f%% (need >=90%%), mean round %.2f (need <=12)", rate * 100.0,
               mean_round),
           elapsed);
}

// ---------------------------------------------------------------- criterion 8

bool trend_monotone(const SweepResult& sweep, bool non_increasing, bool use_total,
                    std::string& detail) {
    bool ok = true;
    detail += "[";
    for (std::size_t i = 0; i < sweep.rates.size(); ++i) {
        const auto& r = sweep.rates[i];
        const double value = use_total ? r.type_i + r.type_ii : r.type_ii;
        detail += fmt(i + 1 < sweep.rates.size() ? "%.2f " : "%.2f", value);
        if (i == 0) continue;
        const auto& prev = sweep.rates[i - 1];
        const double prev_value = use_total ? prev.type_i + prev.type_ii : prev.type_ii;
        const double widen = (use_total ? prev.ci_i + prev.ci_ii : prev.ci_ii) +
                             (use_total ? r.ci_i + r.ci_ii : r.ci_ii);
        if (non_increasing) {
            ok = ok && value <= prev_value + widen;
        } else {
            ok = ok && value >= prev_value - widen;
        }
    }
    detail += "] ";
    return ok;
}

void criterion_monotone_sweeps() {
    Timer timer;
    const TrialConfig config = desk_config();
    std::string detail;
    bool ok = true;

    const std::vector<double> gammas{0.15, 0.25, 0.35, 0.45};
    const auto gamma_sweep = run_sweep(config, "gamma", gammas, workers());
    detail += "gamma type-II ";
    ok = trend_monotone(gamma_sweep, /*non_increasing=*/true, /*use_total=*/false, detail) && ok;

    const std::vector<double> pool_sizes{4, 8, 16, 32};
    const auto pool_sweep = run_sweep(config, "A", pool_sizes, workers());
    detail += "A type-II ";
    ok = trend_monotone(pool_sweep, /*non_increasing=*/false, /*use_total=*/false, detail) && ok;

    const std::vector<double> players{25, 50, 100};
    const auto player_sweep = run_sweep(config, "n_players", players, workers());
    detail += "n total ";
    ok = trend_monotone(player_sweep, /*non_increasing=*/true, /*use_total=*/true, detail) && ok;
    const auto& first = player_sweep.rates.front();
    const auto& last = player_sweep.rates.back();
    const bool n_decreases = first.type_i + first.type_ii > last.type_i + last.type_ii;
    ok = ok && n_decreases;

    const double elapsed = timer.seconds();
    report(ok, "monotone trends: type-II vs gamma and A, total error vs n (Wilson-widened)",
           detail, elapsed);
}

// ---------------------------------------------------------------- criterion 9

void criterion_f_tilde_asymmetry() {
    Timer timer;
    const TrialConfig config = desk_config();
    const std::vector<double> estimates{75.0, 225.0};  // -50% and +50% of the true 150
    const auto sweep = run_sweep(config, "f_tilde", estimates, workers());
    const double under = sweep.rates[0].type_i + sweep.rates[0].type_ii;
    const double over = sweep.rates[1].type_i + sweep.rates[1].type_ii;
    const double elapsed = timer.seconds();
    report(under > over,
           "f-tilde asymmetry at +-50%: underestimation must cost more (full threshold)",
           fmt("total error: under %.2f, over %.2f", under, over), elapsed);
}

// --------------------------------------------------------------- criterion 10

void criterion_baseline_failure() {
    Timer timer;
    TrialConfig config = desk_config();

    // Tune tau at explore 0.1: grid sweep of the basic average test, pick
    // the largest total-error minimizer (prefer sensitivity among ties).
    std::vector<double> taus;
    for (double tau = 1.0; tau <= 9.75 + 1e-9; tau += 0.25) taus.push_back(tau);
    const auto tau_sweep = run_sweep(config, "tau", taus, workers());
    double best_error = 1e9;
    double tau_star = taus.front();
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double total = tau_sweep.rates[i].type_i + tau_sweep.rates[i].type_ii;
        if (total <= best_error) {
            best_error = total;
            tau_star = taus[i];
        }
    }

    // Evaluate at explore 0.2 on the same objective streams: the baseline
    // must now cry wolf while the sequential test stays quiet.
    config.explore_prob = 0.2;
    const auto context = ExperimentContext::resolve(config);
    std::vector<int> baseline_fp(static_cast<std::size_t>(config.num_trials), 0);
    std::vector<int> biad_fp(static_cast<std::size_t>(config.num_trials), 0);
    parallel_for(config.num_trials, workers(), [&](int trial) {
        const auto outcome = run_trial(config, context, EngineKind::kObjective, trial);
        baseline_fp[static_cast<std::size_t>(trial)] = outcome.mean_rating < tau_star ? 1 : 0;
        biad_fp[static_cast<std::size_t>(trial)] = outcome.verdict.biased ? 1 : 0;
    });
    int baseline_total = 0;
    int biad_total = 0;
    for (int i = 0; i < config.num_trials; ++i) {
        baseline_total += baseline_fp[static_cast<std::size_t>(i)];
        biad_total += biad_fp[static_cast<std::size_t>(i)];
    }
    const double baseline_rate = static_cast<double>(baseline_total) / config.num_trials;
    const double biad_rate = static_cast<double>(biad_total) / config.num_trials;
    const double elapsed = timer.seconds();
    report(baseline_rate >= 0.9 && biad_rate <= 0.05,
           "average-test fragility: tau tuned at explore 0.1, evaluated at explore 0.2",
           fmt("tau*=%.2f (tuning error %.2f); baseline type-I %.2f (need >=0.9), "
               "sequential type-I %.2f (need <=0.05)",
               tau_star, best_error, baseline_rate, biad_rate),
           elapsed);
}

// --------------------------------------------------------------- criterion 11

std::string file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void criterion_determinism() {
    Timer timer;
    TrialConfig config = desk_config();
    config.num_trials = 8;
    const std::vector<double> gammas{0.25, 0.45};
    const auto dir = std::filesystem::temp_directory_path();
    const auto p1 = dir / "biad_acceptance_sweep1.csv";
    const auto p2 = dir / "biad_acceptance_sweep2.csv";
    const auto p3 = dir / "biad_acceptance_sweep3.csv";
    save_sweep_csv(run_sweep(config, "gamma", gammas, 1), p1);
    save_sweep_csv(run_sweep(config, "gamma", gammas, workers() + 1), p2);
    save_sweep_csv(run_sweep(config, "gamma", gammas, workers() + 1), p3);
    const std::string a = file_bytes(p1);
    const std::string b = file_bytes(p2);
    const std::string c = file_bytes(p3);
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
    std::filesystem::remove(p3);
    const bool ok = !a.empty() && a == b && b == c;
    const double elapsed = timer.seconds();
    report(ok, "sweep reruns are byte-identical across worker counts",
           fmt("%zu bytes, 1 vs %d workers, rerun", a.size(), workers() + 1), elapsed);
}

}  // namespace

int main() {
    std::printf("acceptance suite: desk scale m=2000, 500 users, n=100 players, Q=40\n");
    criterion_lambert();
    criterion_threshold_identities();
    criterion_oracle_equivalence();
    criterion_chernoff();
    criterion_rank_bound();
    criterion_type_i();
    criterion_detection();
    criterion_monotone_sweeps();
    criterion_f_tilde_asymmetry();
    criterion_baseline_failure();
    criterion_determinism();
    if (g_failures == 0) {
        std::printf("all %d criteria passed\n", g_criterion);
    } else {
        std::printf("%d of %d criteria FAILED\n", g_failures, g_criterion);
    }
    return g_failures;
}

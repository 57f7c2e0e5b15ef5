#include "biad/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "biad/errors.hpp"
#include "biad/lambert.hpp"

namespace biad {

namespace {

constexpr double kE = 2.71828182845904523536;

double chain_multiplier(double beta) {
    // exp(1 + W(beta/e)); the solution y > 1 of y*(ln y - 1) = beta.
    return std::exp(1.0 + detail::lambert_w0_branch0(beta / kE));
}

}  // namespace

ThresholdChain build_threshold(int a_hat, double p, std::size_t m, double c, ThresholdVariant variant) {
    if (!(p > 0.0) || !std::isfinite(p)) {
        throw std::domain_error("build_threshold: p must be positive, got " + std::to_string(p));
    }
    if (a_hat < 1) throw std::invalid_argument("build_threshold: a_hat must be >= 1");
    if (m < 2) throw std::invalid_argument("build_threshold: m must be >= 2");
    if (!(c > 0.0)) throw std::invalid_argument("build_threshold: c must be positive");

    ThresholdChain chain;
    chain.a_hat = a_hat;
    chain.c = c;
    chain.m = m;
    chain.p = p;
    chain.variant = variant;

    const double budget = (static_cast<double>(a_hat) + c) * std::log(static_cast<double>(m));
    chain.beta = budget / p - 1.0;
    chain.p_hat = chain_multiplier(chain.beta) * p;
    chain.beta_hat = budget / chain.p_hat - 1.0;
    chain.threshold = variant == ThresholdVariant::kPrime
                          ? chain.p_hat
                          : chain_multiplier(chain.beta_hat) * chain.p_hat;
    return chain;
}

double approx_p(int t, int a_hat, int n_players, double f_tilde) {
    if (t < 1) throw std::invalid_argument("approx_p: round must be >= 1");
    if (a_hat < 1) throw std::invalid_argument("approx_p: a_hat must be >= 1");
    if (n_players < 1) throw std::invalid_argument("approx_p: n_players must be >= 1");
    if (!(f_tilde > static_cast<double>(t - 1))) {
        throw ConfigError("approx_p: round budget exceeds estimated effective items (f_tilde " +
                          std::to_string(f_tilde) + " <= t - 1 = " + std::to_string(t - 1) + ")");
    }
    const double numerator = static_cast<double>(n_players) * static_cast<double>(a_hat);
    double sum = 0.0;
    for (int l = 1; l <= t; ++l) {
        sum += numerator / (f_tilde - static_cast<double>(l) + 1.0);
    }
    return sum;
}

double exact_p_noiseless(int t, int a_hat, const RatingMatrix& truth, double eta, int n_players) {
    const std::size_t m = truth.num_items();
    if (t < 1) throw std::invalid_argument("exact_p_noiseless: round must be >= 1");
    if (a_hat < 1 || static_cast<std::size_t>(a_hat) > m) {
        throw ConfigError("exact_p_noiseless: a_hat must lie in [1, m]");
    }
    if (n_players < 1 || static_cast<std::size_t>(n_players) > truth.num_users()) {
        throw std::invalid_argument("exact_p_noiseless: n_players out of range");
    }

    std::vector<double> item_mass(m, 0.0);
    std::vector<double> sorted_row;
    for (int u = 0; u < n_players; ++u) {
        const auto row = truth.row(static_cast<std::size_t>(u));
        sorted_row.assign(row.begin(), row.end());
        std::sort(sorted_row.begin(), sorted_row.end());
        for (std::size_t i = 0; i < m; ++i) {
            if (row[i] >= eta) continue;
            // rank = |{j : R_uj >= R_ui}|, ties inclusive.
            const auto first_ge = std::lower_bound(sorted_row.begin(), sorted_row.end(), row[i]);
            const auto rank = static_cast<int>(sorted_row.end() - first_ge);
            double mass = 0.0;
            for (int l = 1; l <= t; ++l) {
                mass += l <= rank ? 1.0 / static_cast<double>(rank - l + 1) : 1.0;
            }
            item_mass[i] += mass;
        }
    }

    std::nth_element(item_mass.begin(), item_mass.begin() + (a_hat - 1), item_mass.end(),
                     std::greater<>());
    double total = 0.0;
    for (int i = 0; i < a_hat; ++i) total += item_mass[static_cast<std::size_t>(i)];
    return total;
}

double chernoff_tail_bound(double p, double threshold) {
    if (!(p > 0.0) || !(threshold > p)) {
        throw std::domain_error("chernoff_tail_bound: requires threshold > p > 0");
    }
    return std::exp(-threshold * std::log(threshold / p) + threshold - p);
}

}  // namespace biad

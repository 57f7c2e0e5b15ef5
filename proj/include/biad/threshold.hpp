#pragma once

#include <cstddef>

#include "biad/rating_matrix.hpp"

namespace biad {

/// Which stopping threshold the detector compares S(t) against.
enum class ThresholdVariant {
    kFull,   // T(t)  = exp(1 + W(beta_hat/e)) * p_hat(t)
    kPrime,  // T'(t) = p_hat(t), the relaxed practical threshold
};

/// One evaluation of the threshold chain at a fixed round. The chained
/// quantities satisfy, with x = threshold/p_hat and y = p_hat/p,
///   x*(ln x - 1) = beta_hat   and   y*(ln y - 1) = beta,
/// which is the identity the false-positive bound rests on.
struct ThresholdChain {
    int a_hat = 0;           // size of the search set
    double c = 0.5;
    std::size_t m = 0;       // item count
    double p = 0.0;          // expected ineffective-hit mass
    double beta = 0.0;       // (a_hat + c) ln m / p - 1
    double p_hat = 0.0;      // exp(1 + W(beta/e)) * p
    double beta_hat = 0.0;   // (a_hat + c) ln m / p_hat - 1
    double threshold = 0.0;  // per variant
    ThresholdVariant variant = ThresholdVariant::kFull;
};

/// Evaluates the chain. p must be positive (std::domain_error otherwise);
/// a_hat >= 1, m >= 2, c > 0. beta and beta_hat always exceed -1, and the
/// Lambert-W factors are evaluated on the principal branch, so the chain is
/// defined for every positive p.
ThresholdChain build_threshold(int a_hat, double p, std::size_t m, double c, ThresholdVariant variant);

/// p(t) from the practical estimate f_tilde of the average number of
/// effective items: sum over l=1..t of n*a_hat / (f_tilde - l + 1).
/// Requires f_tilde > t - 1 so every denominator is positive.
double approx_p(int t, int a_hat, int n_players, double f_tilde);

/// Exact p(t) in the noiseless case (engine estimate equals the truth).
/// Each item's mass is sum over players u and rounds l of
///   1{R_ui < eta} * (l <= rank_ui ? 1/(rank_ui - l + 1) : 1),
/// where rank_ui counts items rated at least R_ui by u; the result is the
/// sum of the a_hat largest item masses (equal to the maximum over all
/// item subsets of size a_hat, since masses add per item). The cap at 1
/// keeps terms meaningful as probabilities once l exceeds the rank.
double exact_p_noiseless(int t, int a_hat, const RatingMatrix& truth, double eta, int n_players);

/// Chernoff tail bound for a sum of independent Bernoulli variables with
/// total mean at most p: P[sum >= T] <= exp(-T ln(T/p) + T - p), valid for
/// T > p > 0. Strictly decreasing in T, at most 1.
double chernoff_tail_bound(double p, double threshold);

}  // namespace biad

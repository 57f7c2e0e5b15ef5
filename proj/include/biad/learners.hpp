#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace biad {

/// Sparse store of the (user, item, rating) triples a simulated engine has
/// seen: the initial seeding plus the true rating of every item it later
/// recommended. Rows are kept sorted by item for fast intersection.
class ObservedRatings {
public:
    ObservedRatings(std::size_t num_users, std::size_t num_items);

    void add(int user, int item, double rating);
    bool contains(int user, int item) const;

    std::size_t num_users() const noexcept { return rows_.size(); }
    std::size_t num_items() const noexcept { return num_items_; }
    std::size_t size() const noexcept { return total_; }

    std::span<const std::pair<int, double>> row(int user) const {
        return rows_[static_cast<std::size_t>(user)];
    }

private:
    std::size_t num_items_;
    std::size_t total_ = 0;
    std::vector<std::vector<std::pair<int, double>>> rows_;
};

/// Dense estimate of the rating matrix, the learner's output.
class EstimateTable {
public:
    EstimateTable(std::size_t num_users, std::size_t num_items)
        : num_items_(num_items), values_(num_users * num_items, 0.0) {}

    double operator()(std::size_t user, std::size_t item) const {
        return values_[user * num_items_ + item];
    }
    double& operator()(std::size_t user, std::size_t item) {
        return values_[user * num_items_ + item];
    }
    std::span<const double> row(std::size_t user) const {
        return {values_.data() + user * num_items_, num_items_};
    }
    std::size_t num_users() const noexcept { return values_.size() / num_items_; }
    std::size_t num_items() const noexcept { return num_items_; }

private:
    std::size_t num_items_;
    std::vector<double> values_;
};

struct CfOptions {
    int neighborhood = 30;          // neighbors kept per prediction, by |sim|
    std::vector<int> target_users;  // rows to fill; empty = all users
};

/// User-based collaborative filtering with Pearson similarity:
///   pred(u,i) = mean_u + sum_v sim(u,v)(r_vi - mean_v) / sum_v |sim(u,v)|
/// over the top neighbors v that rated i. Similarity needs at least two
/// co-rated items and nonzero variance on both sides, else it is 0; users
/// are never their own neighbor. No usable neighbor falls back to the user
/// mean, an unseen user to the global mean. Predictions are clamped to
/// [0, 10]. Rows not in target_users carry the fallback value only.
EstimateTable fit_user_cf(const ObservedRatings& observed, const CfOptions& options = {});

struct MfOptions {
    int rank = 8;
    int epochs = 10;
    double reg = 2.0;
    std::uint64_t seed = 0;
    std::vector<int> target_users;  // rows to materialize; empty = all users
};

/// Bias-augmented alternating least squares: fits
///   r_ui ~ mu + b_u + c_i + x_u . y_i
/// minimizing L2-regularized squared error on observed entries. Items with
/// no observations predict mu + b_u. Deterministic for a fixed seed.
/// Predictions are clamped to [0, 10]. When objective_trace is given it
/// receives the regularized objective after every sweep; exact alternating
/// solves make that sequence non-increasing.
EstimateTable fit_matrix_factorization(const ObservedRatings& observed, const MfOptions& options = {},
                                       std::vector<double>* objective_trace = nullptr);

/// Root-mean-square error of an estimate over the observed entries.
double observed_rmse(const EstimateTable& estimate, const ObservedRatings& observed);

}  // namespace biad

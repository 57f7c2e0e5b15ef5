#include "biad/rating_matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace biad {

RatingMatrix::RatingMatrix(std::size_t num_users, std::size_t num_items, std::vector<double> ratings)
    : num_users_(num_users), num_items_(num_items), ratings_(std::move(ratings)) {
    if (num_users_ == 0 || num_items_ == 0) {
        throw std::invalid_argument("rating matrix needs at least one user and one item");
    }
    if (ratings_.size() != num_users_ * num_items_) {
        throw std::invalid_argument("rating buffer size does not match dimensions");
    }
    for (std::size_t idx = 0; idx < ratings_.size(); ++idx) {
        const double v = ratings_[idx];
        if (!std::isfinite(v) || v < kMinRating || v > kMaxRating) {
            throw std::invalid_argument("rating at user " + std::to_string(idx / num_items_) +
                                        ", item " + std::to_string(idx % num_items_) +
                                        " is outside [0, 10]");
        }
    }
}

double RatingMatrix::at(std::size_t user, std::size_t item) const {
    if (user >= num_users_ || item >= num_items_) {
        throw std::out_of_range("rating index (" + std::to_string(user) + ", " +
                                std::to_string(item) + ") out of range");
    }
    return (*this)(user, item);
}

std::span<const double> RatingMatrix::row(std::size_t user) const {
    if (user >= num_users_) {
        throw std::out_of_range("user index " + std::to_string(user) + " out of range");
    }
    return {ratings_.data() + user * num_items_, num_items_};
}

std::size_t count_at_least(double r, std::span<const double> row) {
    std::size_t count = 0;
    for (double v : row) {
        if (v >= r) ++count;
    }
    return count;
}

std::size_t effective_count(const RatingMatrix& matrix, std::size_t user, double eta) {
    return count_at_least(eta, matrix.row(user));
}

}  // namespace biad

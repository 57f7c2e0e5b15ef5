#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace biad {

inline constexpr double kMinRating = 0.0;
inline constexpr double kMaxRating = 10.0;

/// Dense ground-truth user x item rating matrix on the [0, 10] scale.
/// Immutable after construction; safe to share read-only across threads.
class RatingMatrix {
public:
    /// `ratings` is row-major, one row per user. Throws std::invalid_argument
    /// if the dimensions are empty, the buffer size does not match, or any
    /// entry is non-finite or outside [0, 10].
    RatingMatrix(std::size_t num_users, std::size_t num_items, std::vector<double> ratings);

    std::size_t num_users() const noexcept { return num_users_; }
    std::size_t num_items() const noexcept { return num_items_; }

    double operator()(std::size_t user, std::size_t item) const {
        return ratings_[user * num_items_ + item];
    }

    /// Bounds-checked access; throws std::out_of_range.
    double at(std::size_t user, std::size_t item) const;

    std::span<const double> row(std::size_t user) const;

    bool operator==(const RatingMatrix& other) const = default;

private:
    std::size_t num_users_;
    std::size_t num_items_;
    std::vector<double> ratings_;
};

/// Number of entries in `row` that are >= r. Non-increasing in r.
std::size_t count_at_least(double r, std::span<const double> row);

/// Number of items effective for `user` at efficacy threshold eta,
/// i.e. entries rated >= eta (ties at eta count as effective).
std::size_t effective_count(const RatingMatrix& matrix, std::size_t user, double eta);

}  // namespace biad

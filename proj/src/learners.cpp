#include "biad/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "biad/rating_matrix.hpp"
#include "biad/rng.hpp"

namespace biad {

ObservedRatings::ObservedRatings(std::size_t num_users, std::size_t num_items)
    : num_items_(num_items), rows_(num_users) {
    if (num_users == 0 || num_items == 0) {
        throw std::invalid_argument("observed ratings need at least one user and one item");
    }
}

void ObservedRatings::add(int user, int item, double rating) {
    if (user < 0 || static_cast<std::size_t>(user) >= rows_.size() || item < 0 ||
        static_cast<std::size_t>(item) >= num_items_) {
        throw std::out_of_range("observed rating index out of range");
    }
    auto& row = rows_[static_cast<std::size_t>(user)];
    const auto pos = std::lower_bound(row.begin(), row.end(), item,
                                      [](const auto& entry, int key) { return entry.first < key; });
    if (pos != row.end() && pos->first == item) {
        throw std::logic_error("duplicate observation for user " + std::to_string(user) +
                               ", item " + std::to_string(item));
    }
    row.insert(pos, {item, rating});
    ++total_;
}

bool ObservedRatings::contains(int user, int item) const {
    const auto& row = rows_[static_cast<std::size_t>(user)];
    const auto pos = std::lower_bound(row.begin(), row.end(), item,
                                      [](const auto& entry, int key) { return entry.first < key; });
    return pos != row.end() && pos->first == item;
}

namespace {

double global_mean(const ObservedRatings& observed) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t u = 0; u < observed.num_users(); ++u) {
        for (const auto& [item, rating] : observed.row(static_cast<int>(u))) {
            sum += rating;
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

/// Pearson correlation over co-rated items; 0 when fewer than two items are
/// co-rated or either side has no variance on the co-rated subset.
double pearson_corated(std::span<const std::pair<int, double>> a,
                       std::span<const std::pair<int, double>> b) {
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    int n = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            ++i;
        } else if (b[j].first < a[i].first) {
            ++j;
        } else {
            const double x = a[i].second;
            const double y = b[j].second;
            sa += x;
            sb += y;
            saa += x * x;
            sbb += y * y;
            sab += x * y;
            ++n;
            ++i;
            ++j;
        }
    }
    if (n < 2) return 0.0;
    const double cov = sab - sa * sb / n;
    const double va = saa - sa * sa / n;
    const double vb = sbb - sb * sb / n;
    if (va <= 1e-12 || vb <= 1e-12) return 0.0;
    return cov / std::sqrt(va * vb);
}

double clamp_rating(double v) { return std::clamp(v, kMinRating, kMaxRating); }

}  // namespace

EstimateTable fit_user_cf(const ObservedRatings& observed, const CfOptions& options) {
    const std::size_t num_users = observed.num_users();
    const std::size_t num_items = observed.num_items();
    EstimateTable estimate(num_users, num_items);

    const double mu = global_mean(observed);
    std::vector<double> user_mean(num_users, mu);
    for (std::size_t u = 0; u < num_users; ++u) {
        const auto row = observed.row(static_cast<int>(u));
        if (!row.empty()) {
            double sum = 0.0;
            for (const auto& [item, rating] : row) sum += rating;
            user_mean[u] = sum / static_cast<double>(row.size());
        }
    }

    // Postings: which users rated each item.
    std::vector<std::vector<int>> raters(num_items);
    for (std::size_t v = 0; v < num_users; ++v) {
        for (const auto& [item, rating] : observed.row(static_cast<int>(v))) {
            raters[static_cast<std::size_t>(item)].push_back(static_cast<int>(v));
        }
    }

    std::vector<int> targets = options.target_users;
    if (targets.empty()) {
        targets.resize(num_users);
        std::iota(targets.begin(), targets.end(), 0);
    }

    std::vector<double> sim(num_users);
    std::vector<std::pair<double, int>> candidates;  // (|sim|, rater)
    for (int u : targets) {
        const auto row_u = observed.row(u);
        for (std::size_t v = 0; v < num_users; ++v) {
            sim[v] = static_cast<int>(v) == u ? 0.0 : pearson_corated(row_u, observed.row(static_cast<int>(v)));
        }
        const double fallback = row_u.empty() ? mu : user_mean[static_cast<std::size_t>(u)];
        for (std::size_t i = 0; i < num_items; ++i) {
            candidates.clear();
            for (int v : raters[i]) {
                if (v != u && sim[static_cast<std::size_t>(v)] != 0.0) {
                    candidates.emplace_back(std::abs(sim[static_cast<std::size_t>(v)]), v);
                }
            }
            if (candidates.empty()) {
                estimate(static_cast<std::size_t>(u), i) = clamp_rating(fallback);
                continue;
            }
            if (candidates.size() > static_cast<std::size_t>(options.neighborhood)) {
                std::nth_element(candidates.begin(),
                                 candidates.begin() + options.neighborhood - 1, candidates.end(),
                                 std::greater<>());
                candidates.resize(static_cast<std::size_t>(options.neighborhood));
            }
            double num = 0.0;
            double den = 0.0;
            for (const auto& [weight, v] : candidates) {
                const auto row_v = observed.row(v);
                const auto pos = std::lower_bound(
                    row_v.begin(), row_v.end(), static_cast<int>(i),
                    [](const auto& entry, int key) { return entry.first < key; });
                num += sim[static_cast<std::size_t>(v)] * (pos->second - user_mean[static_cast<std::size_t>(v)]);
                den += weight;
            }
            estimate(static_cast<std::size_t>(u), i) =
                clamp_rating(user_mean[static_cast<std::size_t>(u)] + num / den);
        }
    }

    // Untargeted rows carry their fallback so the table is always complete.
    if (!options.target_users.empty()) {
        std::vector<bool> is_target(num_users, false);
        for (int u : options.target_users) is_target[static_cast<std::size_t>(u)] = true;
        for (std::size_t u = 0; u < num_users; ++u) {
            if (is_target[u]) continue;
            const double fallback = clamp_rating(user_mean[u]);
            for (std::size_t i = 0; i < num_items; ++i) estimate(u, i) = fallback;
        }
    }

    return estimate;
}

namespace {

/// In-place Cholesky solve of (A + reg*I) x = b for small SPD systems.
void ridge_solve(std::vector<double>& a, std::vector<double>& b, int n, double reg) {
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i * n + i)] += reg;
    // Cholesky factorization A = L L^T.
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[static_cast<std::size_t>(i * n + j)];
            for (int k = 0; k < j; ++k) {
                sum -= a[static_cast<std::size_t>(i * n + k)] * a[static_cast<std::size_t>(j * n + k)];
            }
            if (i == j) {
                a[static_cast<std::size_t>(i * n + i)] = std::sqrt(std::max(sum, 1e-12));
            } else {
                a[static_cast<std::size_t>(i * n + j)] = sum / a[static_cast<std::size_t>(j * n + j)];
            }
        }
    }
    // Forward then backward substitution.
    for (int i = 0; i < n; ++i) {
        double sum = b[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) sum -= a[static_cast<std::size_t>(i * n + k)] * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(i)] = sum / a[static_cast<std::size_t>(i * n + i)];
    }
    for (int i = n - 1; i >= 0; --i) {
        double sum = b[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) sum -= a[static_cast<std::size_t>(k * n + i)] * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(i)] = sum / a[static_cast<std::size_t>(i * n + i)];
    }
}

}  // namespace

EstimateTable fit_matrix_factorization(const ObservedRatings& observed, const MfOptions& options,
                                       std::vector<double>* objective_trace) {
    if (options.rank < 1) throw std::invalid_argument("matrix factorization rank must be >= 1");
    const std::size_t num_users = observed.num_users();
    const std::size_t num_items = observed.num_items();
    const int rank = options.rank;
    const int dim = rank + 1;  // bias slot + factors

    const double mu = global_mean(observed);

    // user_vec[u] = [b_u, x_u]; item_vec[i] = [c_i, y_i].
    std::vector<double> user_vec(num_users * static_cast<std::size_t>(dim), 0.0);
    std::vector<double> item_vec(num_items * static_cast<std::size_t>(dim), 0.0);
    Rng init_rng(stream_key(options.seed, stream_tag("mf_init")));
    for (std::size_t i = 0; i < num_items; ++i) {
        for (int d = 1; d < dim; ++d) {
            item_vec[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)] = 0.1 * init_rng.normal();
        }
    }

    // Item postings with ratings for the item half-step.
    std::vector<std::vector<std::pair<int, double>>> item_obs(num_items);
    for (std::size_t u = 0; u < num_users; ++u) {
        for (const auto& [item, rating] : observed.row(static_cast<int>(u))) {
            item_obs[static_cast<std::size_t>(item)].emplace_back(static_cast<int>(u), rating);
        }
    }

    std::vector<double> gram(static_cast<std::size_t>(dim * dim));
    std::vector<double> rhs(static_cast<std::size_t>(dim));
    std::vector<double> feat(static_cast<std::size_t>(dim));

    auto solve_side = [&](bool user_side) {
        const std::size_t count = user_side ? num_users : num_items;
        for (std::size_t idx = 0; idx < count; ++idx) {
            double* out = user_side ? &user_vec[idx * static_cast<std::size_t>(dim)]
                                    : &item_vec[idx * static_cast<std::size_t>(dim)];
            std::fill(gram.begin(), gram.end(), 0.0);
            std::fill(rhs.begin(), rhs.end(), 0.0);
            bool any = false;
            auto accumulate = [&](const double* other, double rating) {
                any = true;
                feat[0] = 1.0;
                for (int d = 1; d < dim; ++d) feat[static_cast<std::size_t>(d)] = other[d];
                const double target = rating - mu;
                for (int r = 0; r < dim; ++r) {
                    rhs[static_cast<std::size_t>(r)] += feat[static_cast<std::size_t>(r)] * target;
                    for (int s = 0; s <= r; ++s) {
                        gram[static_cast<std::size_t>(r * dim + s)] +=
                            feat[static_cast<std::size_t>(r)] * feat[static_cast<std::size_t>(s)];
                    }
                }
            };
            if (user_side) {
                for (const auto& [item, rating] : observed.row(static_cast<int>(idx))) {
                    const double* iv = &item_vec[static_cast<std::size_t>(item) * static_cast<std::size_t>(dim)];
                    // target excludes the other side's bias: r - mu - c_i.
                    accumulate(iv, rating - iv[0]);
                }
            } else {
                for (const auto& [user, rating] : item_obs[idx]) {
                    const double* uv = &user_vec[static_cast<std::size_t>(user) * static_cast<std::size_t>(dim)];
                    accumulate(uv, rating - uv[0]);
                }
            }
            if (!any) {
                std::fill(out, out + dim, 0.0);
                continue;
            }
            for (int r = 0; r < dim; ++r) {
                for (int s = r + 1; s < dim; ++s) {
                    gram[static_cast<std::size_t>(r * dim + s)] = gram[static_cast<std::size_t>(s * dim + r)];
                }
            }
            ridge_solve(gram, rhs, dim, options.reg);
            std::copy(rhs.begin(), rhs.end(), out);
        }
    };

    auto regularized_objective = [&] {
        double loss = 0.0;
        for (std::size_t u = 0; u < num_users; ++u) {
            const double* uv = &user_vec[u * static_cast<std::size_t>(dim)];
            for (const auto& [item, rating] : observed.row(static_cast<int>(u))) {
                const double* iv = &item_vec[static_cast<std::size_t>(item) * static_cast<std::size_t>(dim)];
                double pred = mu + uv[0] + iv[0];
                for (int d = 1; d < dim; ++d) {
                    pred += uv[static_cast<std::size_t>(d)] * iv[static_cast<std::size_t>(d)];
                }
                const double err = rating - pred;
                loss += err * err;
            }
        }
        double norms = 0.0;
        for (double v : user_vec) norms += v * v;
        for (double v : item_vec) norms += v * v;
        return loss + options.reg * norms;
    };

    if (objective_trace != nullptr) objective_trace->clear();
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        solve_side(true);
        solve_side(false);
        if (objective_trace != nullptr) objective_trace->push_back(regularized_objective());
    }

    EstimateTable estimate(num_users, num_items);
    std::vector<int> targets = options.target_users;
    if (targets.empty()) {
        targets.resize(num_users);
        std::iota(targets.begin(), targets.end(), 0);
    }
    for (int t : targets) {
        const auto u = static_cast<std::size_t>(t);
        const double* uv = &user_vec[u * static_cast<std::size_t>(dim)];
        for (std::size_t i = 0; i < num_items; ++i) {
            const double* iv = &item_vec[i * static_cast<std::size_t>(dim)];
            double value = mu + uv[0] + iv[0];
            for (int d = 1; d < dim; ++d) value += uv[static_cast<std::size_t>(d)] * iv[static_cast<std::size_t>(d)];
            estimate(u, i) = clamp_rating(value);
        }
    }
    return estimate;
}

double observed_rmse(const EstimateTable& estimate, const ObservedRatings& observed) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t u = 0; u < observed.num_users(); ++u) {
        for (const auto& [item, rating] : observed.row(static_cast<int>(u))) {
            const double err = estimate(u, static_cast<std::size_t>(item)) - rating;
            sum += err * err;
            ++count;
        }
    }
    return count > 0 ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
}

}  // namespace biad

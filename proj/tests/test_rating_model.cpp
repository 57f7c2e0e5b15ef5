#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "biad/errors.hpp"
#include "biad/matrix_io.hpp"
#include "biad/rating_matrix.hpp"
#include "biad/rng.hpp"
#include "biad/synthetic.hpp"

using namespace biad;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("count_at_least counts inclusively") {
    const std::vector<double> row{2, 7, 7, 9};
    CHECK(count_at_least(7.0, row) == 3);
    CHECK(count_at_least(10.5, row) == 0);
    CHECK(count_at_least(0.0, row) == 4);
}

TEST_CASE("count_at_least is non-increasing in the threshold") {
    Rng rng(stream_key(42, stream_tag("monotone")));
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> row(1 + rng.below(40));
        for (auto& v : row) v = 10.0 * rng.uniform();
        std::vector<double> thresholds(20);
        for (auto& r : thresholds) r = -1.0 + 12.0 * rng.uniform();
        std::sort(thresholds.begin(), thresholds.end());
        std::size_t prev = row.size() + 1;
        for (double r : thresholds) {
            const std::size_t count = count_at_least(r, row);
            CHECK(count <= prev);
            prev = count;
        }
    }
}

TEST_CASE("every item counts itself in its rank") {
    Rng rng(stream_key(43, stream_tag("selfrank")));
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> row(1 + rng.below(30));
        for (auto& v : row) v = 10.0 * rng.uniform();
        for (double v : row) {
            CHECK(count_at_least(v, row) >= 1);
        }
    }
}

TEST_CASE("effective_count boundary and extremes") {
    const RatingMatrix matrix(1, 3, {5.4, 5.5, 9.0});
    CHECK(effective_count(matrix, 0, 5.5) == 2);  // ties at eta are effective
    CHECK(effective_count(matrix, 0, 5.4) == 3);  // eta at the min rating counts all
    CHECK(effective_count(matrix, 0, 0.0) == 3);
    CHECK(effective_count(matrix, 0, 9.5) == 0);  // above the max rating
    CHECK_THROWS_AS((void)effective_count(matrix, 7, 5.0), std::out_of_range);
}

TEST_CASE("rating matrix validates entries") {
    CHECK_THROWS_AS(RatingMatrix(0, 1, {}), std::invalid_argument);
    CHECK_THROWS_AS(RatingMatrix(1, 2, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(RatingMatrix(1, 2, {1.0, 11.0}), std::invalid_argument);
    CHECK_THROWS_AS(RatingMatrix(1, 2, {1.0, -0.5}), std::invalid_argument);
}

TEST_CASE("synthetic generator is deterministic and seed-sensitive") {
    SyntheticSpec spec;
    spec.num_items = 60;
    spec.num_users = 12;
    spec.target_effective_mean = 9.0;
    spec.seed = 7;
    const RatingMatrix a = generate_synthetic(spec);
    const RatingMatrix b = generate_synthetic(spec);
    CHECK(a == b);

    spec.seed = 8;
    const RatingMatrix c = generate_synthetic(spec);
    bool any_diff = false;
    for (std::size_t u = 0; u < a.num_users() && !any_diff; ++u) {
        for (std::size_t i = 0; i < a.num_items(); ++i) {
            if (a(u, i) != c(u, i)) {
                any_diff = true;
                break;
            }
        }
    }
    CHECK(any_diff);
}

TEST_CASE("synthetic generator rejects infeasible targets") {
    SyntheticSpec spec;
    spec.num_items = 100;
    spec.num_users = 5;
    spec.target_effective_mean = 200.0;
    CHECK_THROWS_AS((void)generate_synthetic(spec), ConfigError);
    spec.target_effective_mean = 100.0;  // boundary: must be < m
    CHECK_THROWS_AS((void)generate_synthetic(spec), ConfigError);
}

TEST_CASE("synthetic effective counts hit the target on average") {
    SUBCASE("m=100, target 20, 1000 users") {
        SyntheticSpec spec;
        spec.num_items = 100;
        spec.num_users = 1000;
        spec.target_effective_mean = 20.0;
        spec.seed = 11;
        const RatingMatrix matrix = generate_synthetic(spec);
        double sum = 0.0;
        for (std::size_t u = 0; u < matrix.num_users(); ++u) {
            sum += static_cast<double>(effective_count(matrix, u, kReferenceEta));
        }
        const double mean = sum / static_cast<double>(matrix.num_users());
        CHECK(mean == doctest::Approx(20.0).epsilon(0.1));  // 20 +- 2
    }
    SUBCASE("m=1000, target 150, 500 users") {
        SyntheticSpec spec;
        spec.num_items = 1000;
        spec.num_users = 500;
        spec.target_effective_mean = 150.0;
        spec.seed = 12;
        const RatingMatrix matrix = generate_synthetic(spec);
        double sum = 0.0;
        for (std::size_t u = 0; u < matrix.num_users(); ++u) {
            sum += static_cast<double>(effective_count(matrix, u, kReferenceEta));
        }
        const double mean = sum / static_cast<double>(matrix.num_users());
        CHECK(mean > 135.0);
        CHECK(mean < 165.0);
    }
}

TEST_CASE("matrix csv round-trip is exact") {
    const RatingMatrix matrix(3, 4,
                              {0.0, 10.0, 5.5, 1.0 / 3.0,
                               9.999999999, 0.1, 2.5, 7.25,
                               3.3333333333333335, 6.7, 8.0, 4.2});
    const auto path = temp_file("biad_roundtrip.csv");
    save_matrix(matrix, path);
    const RatingMatrix loaded = load_matrix(path);
    CHECK(loaded == matrix);
    std::filesystem::remove(path);
}

TEST_CASE("synthetic matrix round-trips through csv") {
    SyntheticSpec spec;
    spec.num_items = 40;
    spec.num_users = 8;
    spec.target_effective_mean = 6.0;
    spec.seed = 3;
    const RatingMatrix matrix = generate_synthetic(spec);
    const auto path = temp_file("biad_roundtrip_syn.csv");
    save_matrix(matrix, path);
    CHECK(load_matrix(path) == matrix);
    std::filesystem::remove(path);
}

TEST_CASE("matrix loader rejects malformed input") {
    const auto path = temp_file("biad_bad.csv");

    SUBCASE("wrong row length") {
        std::ofstream(path) << "2,3\n1.0,2.0,3.0\n4.0,5.0\n";
        CHECK_THROWS_WITH_AS((void)load_matrix(path), doctest::Contains("line 3"), ParseError);
    }
    SUBCASE("non-numeric cell") {
        std::ofstream(path) << "1,3\n1.0,x,3.0\n";
        CHECK_THROWS_WITH_AS((void)load_matrix(path), doctest::Contains("non-numeric"), ParseError);
    }
    SUBCASE("value outside the scale") {
        std::ofstream(path) << "1,3\n1.0,11.0,3.0\n";
        CHECK_THROWS_WITH_AS((void)load_matrix(path), doctest::Contains("outside [0, 10]"), ParseError);
    }
    SUBCASE("missing rows") {
        std::ofstream(path) << "3,2\n1.0,2.0\n";
        CHECK_THROWS_AS((void)load_matrix(path), ParseError);
    }
    std::filesystem::remove(path);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "icq/errors.hpp"
#include "icq/matrix.hpp"
#include "icq/rng.hpp"
#include "icq/stats.hpp"

using namespace icq;

namespace {

WeightMatrix gaussian_matrix(uint64_t seed, uint32_t rows, uint32_t cols) {
    WeightMatrix m = WeightMatrix::zeros(rows, cols);
    for (uint32_t r = 0; r < rows; ++r) {
        SplitMix64 rng(derive_seed(seed, r));
        for (uint32_t c = 0; c < cols; ++c)
            m.at(r, c) = static_cast<float>(rng.next_gaussian());
    }
    return m;
}

// Straightforward double-accumulator product for the permutation tests.
std::vector<float> matvec(const WeightMatrix& m, std::span<const float> x) {
    std::vector<float> y(m.rows);
    for (uint32_t r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        for (uint32_t c = 0; c < m.cols; ++c)
            acc += static_cast<double>(m.at(r, c)) * x[c];
        y[r] = static_cast<float>(acc);
    }
    return y;
}

} // namespace

TEST_CASE("upper critical values match reference quantiles") {
    struct Row {
        uint32_t df;
        double critical;
    };
    // chi2 upper 5% points, frozen from an independent high-precision source.
    const Row table[] = {
        {1, 3.841458820694124},   {3, 7.814727903251179},
        {9, 16.918977604620448},  {15, 24.995790139728613},
        {31, 44.985343280365136}, {63, 82.52872654147211},
        {127, 154.30151616534952}, {255, 293.2478350807001},
    };
    for (const Row& row : table)
        CHECK(chi_square_critical(row.df, 0.05) ==
              doctest::Approx(row.critical).epsilon(1e-9));
    CHECK(chi_square_critical(15, 0.10) ==
          doctest::Approx(22.307129581578693).epsilon(1e-9));
    CHECK(chi_square_critical(15, 0.01) ==
          doctest::Approx(30.57791416689249).epsilon(1e-9));
    CHECK(chi_square_critical(15, 0.001) ==
          doctest::Approx(37.69729821835383).epsilon(1e-9));
}

TEST_CASE("critical value inverts the survival function") {
    for (uint32_t df : {1u, 2u, 5u, 15u, 40u, 100u})
        for (double a : {0.10, 0.05, 0.01, 0.001}) {
            double x = chi_square_critical(df, a);
            CHECK(chi_square_sf(x, df) == doctest::Approx(a).epsilon(1e-8));
        }
}

TEST_CASE("survival function basics") {
    CHECK(chi_square_sf(0.0, 5) == 1.0);
    CHECK(chi_square_sf(-3.0, 5) == 1.0);
    double prev = 1.0;
    for (double x = 0.5; x < 40.0; x += 0.5) {
        double s = chi_square_sf(x, 7);
        CHECK(s < prev);
        CHECK(s > 0.0);
        prev = s;
    }
    CHECK_THROWS_AS(chi_square_sf(1.0, 0), validation_error);
    CHECK_THROWS_AS(chi_square_critical(5, 0.0), validation_error);
    CHECK_THROWS_AS(chi_square_critical(5, 1.0), validation_error);
}

TEST_CASE("statistic from group counts") {
    std::vector<uint32_t> even{2, 2, 2, 2};
    CHECK(chi_square_from_counts(even, 2.0) == 0.0);
    std::vector<uint32_t> skew{4, 0, 2, 2};
    CHECK(chi_square_from_counts(skew, 2.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(chi_square_from_counts(even, 0.0), validation_error);
}

TEST_CASE("test calibration under independent uniform group draws") {
    // 204 independent draws over 16 groups per trial. The rejection rate of
    // the 5% test should sit near its nominal level.
    const int trials = 4000;
    const int draws = 204;
    const uint32_t groups = 16;
    double critical = chi_square_critical(groups - 1, 0.05);
    double expected = static_cast<double>(draws) / groups;
    int rejections = 0;
    SplitMix64 rng(2024);
    for (int t = 0; t < trials; ++t) {
        std::vector<uint32_t> counts(groups, 0);
        for (int i = 0; i < draws; ++i)
            ++counts[rng.next_below(groups)];
        if (chi_square_from_counts(counts, expected) > critical) ++rejections;
    }
    double rate = static_cast<double>(rejections) / trials;
    CHECK(rate > 0.035);
    CHECK(rate < 0.065);
}

TEST_CASE("rejection rate on gaussian rows reflects distinct position sampling") {
    // Outlier positions within a row are distinct (each column ranks at most
    // once), so group counts vary less than independent draws would and the
    // long-run rejection rate settles near 3.5%, below the nominal 5%. The
    // window spans +-3.5 binomial standard errors around that rate.
    WeightMatrix m = gaussian_matrix(77, 3000, 4096);
    auto rep = chi_square_uniformity(m, 0.05, 256, 0.05);
    CHECK(rep.groups == 16);
    CHECK(rep.df == 15);
    CHECK(rep.expected_per_group == doctest::Approx(204.0 / 16.0));
    CHECK(!rep.underpowered);
    CHECK(rep.rejection_rate > 0.023);
    CHECK(rep.rejection_rate < 0.047);
    size_t tally = 0;
    for (uint8_t flag : rep.rejected) tally += flag;
    CHECK(rep.rejection_rate ==
          doctest::Approx(static_cast<double>(tally) / m.rows));
}

TEST_CASE("rejection rate on synthetic uniform-position rows") {
    // Rows built directly from 256 uniformly sampled distinct positions out
    // of 4096. Distinctness shrinks group-count variance by (4096-256)/4095,
    // so the long-run rejection rate is near 3.2% rather than the nominal 5%;
    // the window spans +-3.5 binomial standard errors around 3.2% at 3000
    // rows.
    const uint32_t rows = 3000, d = 4096, p = 256;
    WeightMatrix m = WeightMatrix::zeros(rows, d);
    for (uint32_t r = 0; r < rows; ++r) {
        SplitMix64 rng(derive_seed(505, r));
        auto row = m.row(r);
        for (uint32_t c = 0; c < d; ++c)
            row[c] = static_cast<float>(rng.next_gaussian() * 0.01);
        for (uint32_t i : sample_distinct(rng, d, p))
            row[i] = rng.next_below(2) ? 10.0f : -10.0f;
    }
    auto rep = chi_square_uniformity(m, 0.0625, 256, 0.05);
    CHECK(rep.expected_per_group == doctest::Approx(16.0));
    CHECK(rep.rejection_rate > 0.021);
    CHECK(rep.rejection_rate < 0.044);
}

TEST_CASE("clustered outliers are rejected almost always") {
    const uint32_t rows = 256, cols = 4096;
    WeightMatrix m = gaussian_matrix(78, rows, cols);
    // Concentrate the large-magnitude entries in the first tenth of the row.
    for (uint32_t r = 0; r < rows; ++r) {
        SplitMix64 rng(derive_seed(991, r));
        for (uint32_t c = 0; c < cols / 10; ++c)
            m.at(r, c) = static_cast<float>(rng.next_gaussian() * 10.0);
    }
    auto rep = chi_square_uniformity(m, 0.05, 256, 0.05);
    CHECK(rep.rejection_rate > 0.99);
}

TEST_CASE("sparse outlier budgets flag the test as underpowered") {
    WeightMatrix m = gaussian_matrix(79, 8, 512);
    auto rep = chi_square_uniformity(m, 0.01, 256, 0.05);
    CHECK(rep.groups == 2);
    CHECK(rep.df == 1);
    // floor(0.01 * 512) = 5 outliers over 2 groups.
    CHECK(rep.expected_per_group == doctest::Approx(2.5));
    CHECK(rep.underpowered);
}

TEST_CASE("positions in a trailing partial group are dropped") {
    const uint32_t cols = 600; // groups of 256 cover [0, 512)
    WeightMatrix m = WeightMatrix::zeros(1, cols);
    SplitMix64 rng(80);
    for (uint32_t c = 0; c < cols; ++c)
        m.at(0, c) = static_cast<float>(rng.next_gaussian() * 0.01);
    // gamma 0.05 -> 30 outliers; park them all beyond the last full group.
    for (uint32_t c = 570; c < 600; ++c)
        m.at(0, c) = (c % 2) ? 50.0f : -50.0f;
    auto rep = chi_square_uniformity(m, 0.05, 256, 0.05);
    CHECK(rep.groups == 2);
    CHECK(rep.statistic[0] == 0.0);
    CHECK(rep.rejected[0] == 0);
    CHECK(rep.expected_per_group == 0.0);
    CHECK(rep.underpowered);
}

TEST_CASE("uniformity test validation") {
    WeightMatrix m = gaussian_matrix(81, 2, 100);
    CHECK_THROWS_AS(chi_square_uniformity(m, 0.05, 100, 0.05), validation_error);
    CHECK_THROWS_AS(chi_square_uniformity(m, 0.05, 0, 0.05), validation_error);
    CHECK_THROWS_AS(chi_square_uniformity(m, 0.0, 10, 0.05), validation_error);
    CHECK_THROWS_AS(chi_square_uniformity(m, 0.6, 10, 0.05), validation_error);
}

TEST_CASE("column permutation moves content and inverts cleanly") {
    WeightMatrix m = gaussian_matrix(82, 5, 64);
    auto [perm, rec] = random_permute_columns(m, 4321);
    REQUIRE(rec.forward.size() == 64);
    REQUIRE(rec.inverse.size() == 64);
    // forward is a permutation of 0..63.
    auto sorted = rec.forward;
    std::sort(sorted.begin(), sorted.end());
    for (uint32_t j = 0; j < 64; ++j) CHECK(sorted[j] == j);
    for (uint32_t j = 0; j < 64; ++j)
        CHECK(rec.inverse[rec.forward[j]] == j);
    for (uint32_t r = 0; r < m.rows; ++r)
        for (uint32_t j = 0; j < m.cols; ++j)
            CHECK(perm.at(r, j) == m.at(r, rec.forward[j]));
    // Applying the recorded permutation again reproduces the same matrix.
    WeightMatrix again = apply_column_permutation(m, rec);
    CHECK(again.values == perm.values);
    // Same seed, same permutation; different seed, different one.
    auto [perm2, rec2] = random_permute_columns(m, 4321);
    CHECK(rec2.forward == rec.forward);
    auto [perm3, rec3] = random_permute_columns(m, 4322);
    CHECK(rec3.forward != rec.forward);
}

TEST_CASE("permuted matrix times permuted vector preserves the product") {
    WeightMatrix m = gaussian_matrix(83, 12, 96);
    std::vector<float> x(96);
    SplitMix64 rng(84);
    for (float& v : x) v = static_cast<float>(rng.next_gaussian());
    auto [perm, rec] = random_permute_columns(m, 9);
    auto y0 = matvec(m, x);
    auto y1 = matvec(perm, apply_to_vector(x, rec));
    REQUIRE(y1.size() == y0.size());
    for (size_t r = 0; r < y0.size(); ++r)
        CHECK(y1[r] == doctest::Approx(y0[r]).epsilon(1e-5));
}

TEST_CASE("row permutation reorders outputs") {
    WeightMatrix m = gaussian_matrix(85, 16, 32);
    SplitMix64 rng(86);
    PermutationRecord rec;
    rec.forward = random_permutation(rng, 16);
    rec.inverse.resize(16);
    for (uint32_t i = 0; i < 16; ++i) rec.inverse[rec.forward[i]] = i;
    WeightMatrix perm = apply_row_permutation(m, rec);
    std::vector<float> x(32, 1.0f);
    auto y0 = matvec(m, x);
    auto y1 = matvec(perm, x);
    for (uint32_t i = 0; i < 16; ++i) CHECK(y1[i] == y0[rec.forward[i]]);
    CHECK_THROWS_AS(apply_row_permutation(gaussian_matrix(87, 5, 32), rec),
                    validation_error);
    std::vector<float> short_vec(8, 0.0f);
    CHECK_THROWS_AS(apply_to_vector(short_vec, rec), validation_error);
}

TEST_CASE("per-layer permutations compose back to the original network") {
    const std::vector<std::pair<uint32_t, uint32_t>> dims{
        {64, 48}, {32, 64}, {16, 32}};
    std::vector<WeightMatrix> layers;
    for (size_t l = 0; l < dims.size(); ++l)
        layers.push_back(
            gaussian_matrix(100 + l, dims[l].first, dims[l].second));
    std::vector<float> x(48);
    SplitMix64 rng(103);
    for (float& v : x) v = static_cast<float>(rng.next_gaussian());

    // Reference composition.
    std::vector<float> y = x;
    for (const auto& w : layers) y = matvec(w, y);

    auto records = chain_permutations(dims, 31337);
    REQUIRE(records.size() == 3);
    for (size_t l = 0; l < 3; ++l)
        CHECK(records[l].forward.size() == dims[l].second);

    // Permute each layer's columns by its own record and its rows by the next
    // layer's record; the last layer's rows stay put.
    std::vector<WeightMatrix> shuffled;
    for (size_t l = 0; l < layers.size(); ++l) {
        WeightMatrix w = apply_column_permutation(layers[l], records[l]);
        if (l + 1 < layers.size())
            w = apply_row_permutation(w, records[l + 1]);
        shuffled.push_back(std::move(w));
    }
    std::vector<float> yp = apply_to_vector(x, records[0]);
    for (const auto& w : shuffled) yp = matvec(w, yp);

    REQUIRE(yp.size() == y.size());
    for (size_t i = 0; i < y.size(); ++i)
        CHECK(yp[i] == doctest::Approx(y[i]).epsilon(1e-4));

    // Determinism and shape checks.
    auto again = chain_permutations(dims, 31337);
    for (size_t l = 0; l < 3; ++l)
        CHECK(again[l].forward == records[l].forward);
    const std::vector<std::pair<uint32_t, uint32_t>> bad{{64, 48}, {32, 60}};
    CHECK_THROWS_AS(chain_permutations(bad, 1), validation_error);
    const std::vector<std::pair<uint32_t, uint32_t>> none{};
    CHECK(chain_permutations(none, 1).empty());
}

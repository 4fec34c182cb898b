#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "icq/matrix.hpp"

namespace icq {

// Pearson chi-square goodness-of-fit of per-row outlier positions against a
// uniform spread over fixed-size column groups. A trailing partial group is
// dropped; positions inside it do not contribute.
struct ChiSquareReport {
    std::vector<double> statistic;  // one per row
    std::vector<uint8_t> rejected;  // statistic > critical_value
    double rejection_rate = 0.0;
    uint32_t group_size = 0;
    uint32_t groups = 0;
    uint32_t df = 0;                // groups - 1
    double significance = 0.0;
    double critical_value = 0.0;
    double expected_per_group = 0.0; // mean retained outliers per group
    bool underpowered = false;       // expected count below 5
};

// statistic = sum over groups of (observed - expected)^2 / expected, with
// expected = (retained outliers) / groups, computed per row.
ChiSquareReport chi_square_uniformity(const WeightMatrix& m, double gamma,
                                      uint32_t group_size, double significance);

// Helper shared with tests: the statistic for one set of group counts.
double chi_square_from_counts(std::span<const uint32_t> counts, double expected);

// Upper critical value: the x with P(X > x) = significance for X ~ chi2(df).
double chi_square_critical(uint32_t df, double significance);

// Survival function P(X > x) for X ~ chi2(df) (regularized incomplete gamma).
double chi_square_sf(double x, uint32_t df);

// One reusable column permutation: column j of the permuted matrix holds
// column forward[j] of the original, and inverse undoes it.
struct PermutationRecord {
    uint64_t seed = 0;
    std::vector<uint32_t> forward;
    std::vector<uint32_t> inverse;
};

std::pair<WeightMatrix, PermutationRecord>
random_permute_columns(const WeightMatrix& m, uint64_t seed);

WeightMatrix apply_column_permutation(const WeightMatrix& m,
                                      const PermutationRecord& rec);

// Row i of the result holds row forward[i] of the input.
WeightMatrix apply_row_permutation(const WeightMatrix& m,
                                   const PermutationRecord& rec);

// x'[j] = x[forward[j]]; feeding a column-permuted matrix the permuted vector
// reproduces the original product.
std::vector<float> apply_to_vector(std::span<const float> x,
                                   const PermutationRecord& rec);

// Per-layer permutations for a feed-forward chain y = W_L(...(W_1 x)).
// Entry l permutes layer l's columns; layer l's rows are permuted by entry
// l+1, and the last layer's rows stay in place, so the composed network maps
// the permuted input to the *original* output. dims are (d_out, d_in) per
// layer; consecutive layers must chain (d_in of layer l+1 == d_out of layer l).
std::vector<PermutationRecord>
chain_permutations(std::span<const std::pair<uint32_t, uint32_t>> dims,
                   uint64_t seed);

} // namespace icq

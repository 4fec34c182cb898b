#include "icq/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "icq/errors.hpp"
#include "icq/parallel.hpp"
#include "icq/partition.hpp"
#include "icq/rng.hpp"

namespace icq {

// ---------------------------------------------------------------------------
// Regularized incomplete gamma (series + continued fraction), good to ~1e-12
// over the chi-square ranges used here.

namespace {

double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz's algorithm for the continued fraction of Q(a, x).
double gamma_q_fraction(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double regularized_gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0)
        throw validation_error("regularized_gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

} // namespace

double chi_square_sf(double x, uint32_t df) {
    if (df == 0)
        throw validation_error("chi_square_sf: df must be positive");
    if (x <= 0.0) return 1.0;
    return regularized_gamma_q(0.5 * df, 0.5 * x);
}

double chi_square_critical(uint32_t df, double significance) {
    if (df == 0)
        throw validation_error("chi_square_critical: df must be positive");
    if (!(significance > 0.0 && significance < 1.0))
        throw validation_error("chi_square_critical: significance must lie in (0, 1)");
    // sf is strictly decreasing; bisect sf(x) = significance.
    double lo = 0.0;
    double hi = df + 10.0 * std::sqrt(2.0 * df) + 50.0;
    while (chi_square_sf(hi, df) > significance) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (chi_square_sf(mid, df) > significance)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

double chi_square_from_counts(std::span<const uint32_t> counts, double expected) {
    if (!(expected > 0.0))
        throw validation_error("chi_square_from_counts: expected must be positive");
    double stat = 0.0;
    for (uint32_t o : counts) {
        double d = static_cast<double>(o) - expected;
        stat += d * d / expected;
    }
    return stat;
}

ChiSquareReport chi_square_uniformity(const WeightMatrix& m, double gamma,
                                      uint32_t group_size, double significance) {
    m.validate();
    if (!(gamma > 0.0 && gamma <= 0.5))
        throw validation_error("chi_square_uniformity: gamma must lie in (0, 0.5]");
    if (group_size == 0)
        throw validation_error("chi_square_uniformity: group_size must be positive");
    uint32_t groups = m.cols / group_size;
    if (groups < 2)
        throw validation_error("chi_square_uniformity: need at least 2 full groups");

    ChiSquareReport rep;
    rep.group_size = group_size;
    rep.groups = groups;
    rep.df = groups - 1;
    rep.significance = significance;
    rep.critical_value = chi_square_critical(rep.df, significance);
    rep.statistic.resize(m.rows);
    rep.rejected.resize(m.rows);
    uint32_t retained_cols = groups * group_size;

    std::vector<double> expected_sum(m.rows, 0.0);
    parallel_for(m.rows, [&](size_t begin, size_t end) {
        for (size_t r = begin; r < end; ++r) {
            auto part = partition_row(m.row(static_cast<uint32_t>(r)), gamma);
            std::vector<uint32_t> counts(groups, 0);
            uint32_t retained = 0;
            for (uint32_t pos : part.outlier_indices) {
                if (pos < retained_cols) {
                    ++counts[pos / group_size];
                    ++retained;
                }
            }
            double expected = static_cast<double>(retained) / groups;
            expected_sum[r] = expected;
            double stat =
                retained > 0 ? chi_square_from_counts(counts, expected) : 0.0;
            rep.statistic[r] = stat;
            rep.rejected[r] = stat > rep.critical_value ? 1 : 0;
        }
    });

    size_t rejections = 0;
    double esum = 0.0;
    for (size_t r = 0; r < m.rows; ++r) {
        rejections += rep.rejected[r];
        esum += expected_sum[r];
    }
    rep.rejection_rate = static_cast<double>(rejections) / m.rows;
    rep.expected_per_group = esum / m.rows;
    rep.underpowered = rep.expected_per_group < 5.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Permutations

std::pair<WeightMatrix, PermutationRecord>
random_permute_columns(const WeightMatrix& m, uint64_t seed) {
    m.validate();
    PermutationRecord rec;
    rec.seed = seed;
    SplitMix64 rng(seed);
    rec.forward = random_permutation(rng, m.cols);
    rec.inverse.resize(m.cols);
    for (uint32_t j = 0; j < m.cols; ++j) rec.inverse[rec.forward[j]] = j;
    return {apply_column_permutation(m, rec), std::move(rec)};
}

WeightMatrix apply_column_permutation(const WeightMatrix& m,
                                      const PermutationRecord& rec) {
    if (rec.forward.size() != m.cols)
        throw validation_error("column permutation length does not match matrix");
    WeightMatrix out = WeightMatrix::zeros(m.rows, m.cols);
    for (uint32_t r = 0; r < m.rows; ++r)
        for (uint32_t j = 0; j < m.cols; ++j)
            out.at(r, j) = m.at(r, rec.forward[j]);
    return out;
}

WeightMatrix apply_row_permutation(const WeightMatrix& m,
                                   const PermutationRecord& rec) {
    if (rec.forward.size() != m.rows)
        throw validation_error("row permutation length does not match matrix");
    WeightMatrix out = WeightMatrix::zeros(m.rows, m.cols);
    for (uint32_t r = 0; r < m.rows; ++r)
        for (uint32_t j = 0; j < m.cols; ++j)
            out.at(r, j) = m.at(rec.forward[r], j);
    return out;
}

std::vector<float> apply_to_vector(std::span<const float> x,
                                   const PermutationRecord& rec) {
    if (rec.forward.size() != x.size())
        throw validation_error("permutation length does not match vector");
    std::vector<float> out(x.size());
    for (size_t j = 0; j < x.size(); ++j) out[j] = x[rec.forward[j]];
    return out;
}

std::vector<PermutationRecord>
chain_permutations(std::span<const std::pair<uint32_t, uint32_t>> dims,
                   uint64_t seed) {
    std::vector<PermutationRecord> records;
    if (dims.empty()) return records; // zero layers: nothing to permute
    for (size_t l = 0; l + 1 < dims.size(); ++l)
        if (dims[l + 1].second != dims[l].first)
            throw validation_error(
                "chain_permutations: layer " + std::to_string(l + 1) +
                " input width does not match layer " + std::to_string(l) +
                " output width");
    records.reserve(dims.size());
    for (size_t l = 0; l < dims.size(); ++l) {
        PermutationRecord rec;
        rec.seed = derive_seed(seed, l);
        SplitMix64 rng(rec.seed);
        rec.forward = random_permutation(rng, dims[l].second);
        rec.inverse.resize(rec.forward.size());
        for (uint32_t j = 0; j < rec.forward.size(); ++j)
            rec.inverse[rec.forward[j]] = j;
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace icq

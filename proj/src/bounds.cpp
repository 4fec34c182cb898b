#include "icq/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "icq/errors.hpp"
#include "icq/gapcodec.hpp"
#include "icq/rng.hpp"

namespace icq {

namespace {

void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma <= 0.5))
        throw validation_error("gamma must lie in (0, 0.5]");
}

void check_width(int b) {
    if (b < min_gap_bits || b > max_gap_bits)
        throw validation_error("bit width must lie in [" +
                               std::to_string(min_gap_bits) + ", " +
                               std::to_string(max_gap_bits) + "]");
}

} // namespace

double lemma1_bound(double gamma, int bit_width) {
    check_gamma(gamma);
    check_width(bit_width);
    double m = std::pow(2.0, bit_width) - 1.0;
    return gamma * bit_width * (1.0 + 1.0 / std::expm1(gamma * m));
}

double lemma2_bound(double gamma, int bit_width, uint32_t row_length) {
    check_gamma(gamma);
    check_width(bit_width);
    if (row_length == 0)
        throw validation_error("row_length must be positive");
    double m = std::pow(2.0, bit_width) - 1.0;
    double d = static_cast<double>(row_length);
    return ((1.0 - gamma + 1.0 / d) / m + gamma) * bit_width;
}

namespace {

// `leading` positions at the front, the rest flush against the row end.
// The middle gap is d - p + 1 columns regardless of the split point.
std::vector<uint32_t> worst_case_positions(uint32_t row_length, uint32_t p,
                                           uint32_t leading) {
    if (p < 2)
        throw validation_error("worst-case placement needs at least 2 outliers");
    if (leading == 0 || leading >= p)
        throw validation_error("leading run must lie in [1, p-1]");
    std::vector<uint32_t> out;
    out.reserve(p);
    for (uint32_t i = 0; i < leading; ++i) out.push_back(i);
    uint32_t trailing = p - leading;
    for (uint32_t i = 0; i < trailing; ++i)
        out.push_back(row_length - trailing + i);
    return out;
}

} // namespace

std::vector<uint32_t> worst_case_indices(uint32_t row_length, double gamma,
                                         uint32_t leading) {
    check_gamma(gamma);
    if (row_length == 0)
        throw validation_error("row_length must be positive");
    uint32_t p = static_cast<uint32_t>(
        std::floor(gamma * static_cast<double>(row_length)));
    return worst_case_positions(row_length, p, leading);
}

std::vector<uint32_t> sample_positions(SplitMix64& rng, uint32_t row_length,
                                       uint32_t count, PositionModel model) {
    switch (model) {
    case PositionModel::uniform:
        return sample_distinct(rng, row_length, count);
    case PositionModel::worst_case: {
        if (count < 2)
            throw validation_error("worst-case model needs at least 2 outliers");
        uint32_t leading = 1 + static_cast<uint32_t>(rng.next_below(count - 1));
        return worst_case_positions(row_length, count, leading);
    }
    case PositionModel::clustered: {
        uint32_t region = row_length / 10;
        if (region < count) region = count;
        if (region > row_length) region = row_length;
        return sample_distinct(rng, region, count);
    }
    }
    throw validation_error("unknown position model");
}

OverheadSummary simulate_overhead(uint32_t row_length, double gamma, int bit_width,
                                  uint32_t trials, uint64_t seed,
                                  PositionModel model) {
    check_gamma(gamma);
    check_width(bit_width);
    if (row_length == 0)
        throw validation_error("row_length must be positive");
    if (trials == 0)
        throw validation_error("trials must be positive");
    uint32_t p = static_cast<uint32_t>(
        std::floor(gamma * static_cast<double>(row_length)));
    if (p == 0)
        throw validation_error("gamma * row_length yields zero outliers");

    std::vector<double> overheads(trials);
    for (uint32_t t = 0; t < trials; ++t) {
        SplitMix64 rng(derive_seed(seed, t));
        auto positions = sample_positions(rng, row_length, p, model);
        GapCode code = encode_gaps(positions, row_length, bit_width);
        overheads[t] = measured_overhead(code, row_length);
    }

    OverheadSummary s;
    s.trials = trials;
    s.seed = seed;
    s.model = model;
    s.lemma1 = lemma1_bound(gamma, bit_width);
    s.lemma2 = lemma2_bound(gamma, bit_width, row_length);
    double sum = 0.0;
    s.min = overheads[0];
    s.max = overheads[0];
    for (double v : overheads) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / trials;
    double sq = 0.0;
    for (double v : overheads) sq += (v - s.mean) * (v - s.mean);
    s.stddev = trials > 1 ? std::sqrt(sq / (trials - 1)) : 0.0;
    double half = 1.959963984540054 * s.stddev / std::sqrt(static_cast<double>(trials));
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    return s;
}

int auto_bit_width(double gamma) {
    check_gamma(gamma);
    int best = 3;
    double best_bound = lemma1_bound(gamma, 3);
    for (int b = 4; b <= 12; ++b) {
        double bound = lemma1_bound(gamma, b);
        if (bound < best_bound) {
            best_bound = bound;
            best = b;
        }
    }
    return best;
}

const char* position_model_name(PositionModel model) {
    switch (model) {
    case PositionModel::uniform: return "uniform";
    case PositionModel::worst_case: return "worst_case";
    case PositionModel::clustered: return "clustered";
    }
    return "unknown";
}

} // namespace icq

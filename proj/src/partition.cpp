#include "icq/partition.hpp"

#include <algorithm>
#include <cmath>

#include "icq/errors.hpp"

namespace icq {

RowPartition partition_row(std::span<const float> row, double gamma) {
    if (row.empty())
        throw validation_error("partition_row: row must be non-empty");
    if (!(gamma >= 0.0 && gamma <= 0.5)) // negated comparison also rejects NaN
        throw validation_error("partition_row: gamma must lie in [0, 0.5]");
    for (float v : row)
        if (!std::isfinite(v))
            throw validation_error("partition_row: row contains a non-finite value");

    RowPartition part;
    part.gamma = gamma;
    part.row_length = static_cast<uint32_t>(row.size());
    size_t p = static_cast<size_t>(std::floor(gamma * static_cast<double>(row.size())));

    if (p == 0) {
        part.inlier_values.assign(row.begin(), row.end());
        return part;
    }

    // Top-p by |value|; ties prefer the smaller column index so the selection
    // is a total order.
    std::vector<uint32_t> order(row.size());
    for (uint32_t i = 0; i < row.size(); ++i) order[i] = i;
    auto more_extreme = [&](uint32_t a, uint32_t b) {
        float ma = std::fabs(row[a]);
        float mb = std::fabs(row[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    };
    std::nth_element(order.begin(), order.begin() + (p - 1), order.end(), more_extreme);

    part.outlier_indices.assign(order.begin(), order.begin() + p);
    std::sort(part.outlier_indices.begin(), part.outlier_indices.end());

    part.outlier_values.reserve(p);
    part.inlier_values.reserve(row.size() - p);
    size_t next_outlier = 0;
    for (uint32_t c = 0; c < row.size(); ++c) {
        if (next_outlier < p && part.outlier_indices[next_outlier] == c) {
            part.outlier_values.push_back(row[c]);
            ++next_outlier;
        } else {
            part.inlier_values.push_back(row[c]);
        }
    }
    return part;
}

namespace {

double span_of(std::span<const float> values) {
    if (values.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return static_cast<double>(*hi) - static_cast<double>(*lo);
}

} // namespace

RangeReport range_report(const RowPartition& part, std::span<const float> row) {
    if (row.size() != part.row_length)
        throw validation_error("range_report: row length does not match partition");
    if (part.outlier_values.size() + part.inlier_values.size() != row.size())
        throw validation_error("range_report: partition does not cover the row");

    RangeReport rep;
    rep.total_range = span_of(row);
    rep.inlier_range = span_of(part.inlier_values);
    rep.outlier_range = span_of(part.outlier_values);
    // A constant row has zero total range; every quantizer represents it
    // exactly, so the normalized range is reported as 0.
    rep.normalized_inlier_range =
        rep.total_range > 0.0 ? rep.inlier_range / rep.total_range : 0.0;
    return rep;
}

} // namespace icq

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace icq {

// A row split into outliers (the floor(gamma * length) entries of largest
// absolute value) and inliers (everything else). Both value lists preserve
// ascending column order; outlier_indices are 0-based columns.
struct RowPartition {
    double gamma = 0.0;
    uint32_t row_length = 0;
    std::vector<uint32_t> outlier_indices; // strictly ascending
    std::vector<float> outlier_values;     // aligned with outlier_indices
    std::vector<float> inlier_values;      // remaining entries, ascending column order

    size_t outlier_count() const { return outlier_indices.size(); }
    size_t inlier_count() const { return inlier_values.size(); }
};

// Range bookkeeping for one partitioned row. normalized_inlier_range is the
// fraction of the full row range the inliers span; removing a few extreme
// entries should shrink the range a quantizer must cover, and this is the
// number that says by how much.
struct RangeReport {
    double total_range = 0.0;
    double inlier_range = 0.0;
    double outlier_range = 0.0;
    double normalized_inlier_range = 0.0; // inlier_range / total_range, in [0, 1]
};

// Splits `row` by magnitude. The outlier count is floor(gamma * row.size());
// ties at the threshold keep the smaller column index in the outlier set, so
// the result is fully deterministic. gamma must lie in [0, 0.5] and the row
// must be non-empty with finite entries.
RowPartition partition_row(std::span<const float> row, double gamma);

// Computes range statistics for a partition produced from `row`.
RangeReport range_report(const RowPartition& part, std::span<const float> row);

} // namespace icq

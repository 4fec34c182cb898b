#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "icq/gapcodec.hpp"
#include "icq/matrix.hpp"

namespace icq {

// Uniform (round-to-nearest) codebook: level(c) = zero_point + scale * c for
// c in [0, 2^bits - 1]. Empty codebooks (no values on that side) keep
// scale = zero_point = 0.
struct UniformCodebook {
    uint8_t bits = 0;
    float scale = 0.0f;
    float zero_point = 0.0f;

    float level(uint32_t code) const {
        return zero_point + scale * static_cast<float>(code);
    }
    // Nearest code, halfway cases rounded away from zero, clamped to range.
    uint32_t quantize(float v) const;
};

// Outliers under the uniform scheme keep their sign exactly: one sign bit
// selects the side, and bits-1 magnitude bits index a per-side codebook fit
// over that side's values.
struct SignSplitCodebook {
    UniformCodebook negative; // fit over the negative values
    UniformCodebook positive; // fit over the non-negative values
};

// Nearest-centroid codebook from 1-D weighted k-means. Centroids are strictly
// ascending; assignment boundaries are the midpoints, ties going to the lower
// code.
struct KMeansCodebook {
    std::vector<float> centroids;

    uint32_t assign(float v) const;
    float level(uint32_t code) const { return centroids[code]; }
};

struct KMeansOptions {
    uint32_t k = 4;
    uint32_t max_iters = 100;
    double tol = 1e-8; // relative centroid movement that counts as converged
    uint32_t restarts = 8;
    uint64_t seed = 0;
};

struct KMeansResult {
    KMeansCodebook codebook;
    double objective = 0.0; // sum_i w_i (v_i - nearest centroid)^2
    uint32_t iterations = 0;
    std::vector<double> objective_history; // one entry per Lloyd iteration
};

// Fits bits-wide uniform levels over [min, max] of `values` and returns the
// codebook plus one code per value. values must be non-empty and finite;
// bits in [1, 8].
std::pair<UniformCodebook, std::vector<uint8_t>>
rtn_fit_quantize(std::span<const float> values, int bits);

struct RtnOutlierResult {
    SignSplitCodebook codebook;
    std::vector<uint8_t> signs; // 1 = negative
    std::vector<uint8_t> codes; // bits-1 wide magnitude codes
};

// Sign-split uniform quantization for outliers; bits in [2, 8] (one bit is
// spent on the sign).
RtnOutlierResult rtn_outlier_quantize(std::span<const float> values, int bits);

// 1-D weighted k-means (Lloyd). Restart 0 seeds centroids at evenly spaced
// weighted quantiles; later restarts use weighted k-means++ seeding. Empty
// clusters are re-seeded at the value with the largest weighted squared error.
// The per-iteration objective is recorded and verified non-increasing. If the
// values hold fewer than k distinct points the codebook collapses to the
// distinct values (objective 0). weights must be non-negative with a positive
// sum; pass an empty span for uniform weighting.
KMeansResult weighted_kmeans_fit(std::span<const float> values,
                                 std::span<const float> weights,
                                 const KMeansOptions& opts);

enum class Scheme : uint8_t { rtn = 0, sk = 1 };

// Everything needed to reconstruct one row except the outlier positions
// (those live in the companion GapCode).
struct QuantizedRow {
    std::vector<uint8_t> inlier_codes;
    std::vector<uint8_t> outlier_codes;
    std::vector<uint8_t> outlier_signs;  // rtn scheme only
    UniformCodebook inlier_uniform;      // rtn
    SignSplitCodebook outlier_uniform;   // rtn
    KMeansCodebook inlier_kmeans;        // sk
    KMeansCodebook outlier_kmeans;       // sk
};

struct QuantizeConfig {
    double gamma = 0.05;
    int bits = 3;                     // code width for inliers (and outliers)
    Scheme scheme = Scheme::rtn;
    int gap_bits = 0;                 // 0 = pick automatically from gamma
    GapMode mode = GapMode::whole_row;
    uint32_t block_size = 256;        // used when mode == blockwise
    uint64_t seed = 0;                // k-means seeding (sk scheme)
    uint32_t kmeans_restarts = 8;
};

struct RowQuantization {
    QuantizedRow row;
    GapCode gaps;
};

// Full per-row pipeline: partition -> fit inlier and outlier codebooks ->
// encode outlier positions. `weights` (optional, row-aligned) steers the sk
// scheme's k-means objective; it is ignored by rtn.
RowQuantization quantize_row(std::span<const float> row, const QuantizeConfig& cfg,
                             std::span<const float> weights = {});

std::vector<float> dequantize_row(const RowQuantization& rq, Scheme scheme,
                                  uint32_t row_length);

// Whole-matrix quantization bundle; the container module serializes it.
struct QuantizedTensor {
    uint32_t d_out = 0;
    uint32_t d_in = 0;
    Scheme scheme = Scheme::rtn;
    uint8_t bits = 0;
    uint8_t gap_bits = 0;
    GapMode mode = GapMode::whole_row;
    uint32_t block_size = 0; // 0 for whole-row
    uint32_t outliers_per_row = 0;
    double gamma = 0.0;
    std::vector<RowQuantization> rows;
};

QuantizedTensor quantize_matrix(const WeightMatrix& m, const QuantizeConfig& cfg,
                                const WeightMatrix* weights = nullptr);

WeightMatrix dequantize_matrix(const QuantizedTensor& t);

// Storage accounting in bits per weight. `total()` must equal
// 8 * serialized_size / (d_out * d_in) exactly (the container test holds the
// two sides together).
struct StorageBreakdown {
    double code_bits = 0.0;     // inlier + outlier codes + sign bits
    double index_bits = 0.0;    // gap tokens + per-block count metadata
    double codebook_bits = 0.0; // per-row codebook parameters
    double framing_bits = 0.0;  // headers, row lengths, stream padding
    double total() const {
        return code_bits + index_bits + codebook_bits + framing_bits;
    }
};

StorageBreakdown storage_accounting(const QuantizedTensor& t);

// Baseline: plain uniform quantization over fixed-size groups (no outlier
// handling). storage_bits counts codes plus two 32-bit parameters per group.
struct GroupedRtn {
    uint32_t group_size = 0;
    std::vector<UniformCodebook> codebooks; // one per group
    std::vector<uint8_t> codes;
    uint64_t storage_bits = 0;
};

GroupedRtn grouped_rtn_baseline(std::span<const float> row, int bits,
                                uint32_t group_size);

std::vector<float> dequantize_grouped(const GroupedRtn& g);

} // namespace icq

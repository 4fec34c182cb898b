#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "icq/matrix.hpp"
#include "icq/quantizers.hpp"

namespace icq {

// All matvec variants share one canonical accumulation order -- per row, one
// double accumulator, columns ascending -- and one float-returning dequant
// helper, so their results agree bit for bit. Block structure (blockwise gap
// streams) changes how positions are decoded, never the arithmetic sequence.

// Walks each row's gap stream inline: positions are decoded token by token
// while the dot product runs, without materializing the outlier set.
std::vector<double> matvec_fused(const QuantizedTensor& t,
                                 std::span<const float> x);

// Decodes each row's outlier positions into a bitmask first, then runs the
// same walk consulting the mask.
std::vector<double> matvec_predecoded(const QuantizedTensor& t,
                                      std::span<const float> x);

// Reference: fully dequantized dense matrix, same walk.
std::vector<double> matvec_dense_reference(const WeightMatrix& dense,
                                           std::span<const float> x);

struct ThroughputReport {
    uint32_t repetitions = 0;
    // Median / best wall-clock seconds per matvec call.
    double fused_median_s = 0.0, fused_min_s = 0.0;
    double predecoded_median_s = 0.0, predecoded_min_s = 0.0;
    double dense_median_s = 0.0, dense_min_s = 0.0;
    uint64_t quantized_bytes = 0; // serialized tensor size
    uint64_t dense_bytes = 0;     // d_out * d_in * 4
};

// Times the three paths on identical input; informational only (results are
// checked for agreement first).
ThroughputReport throughput_probe(const QuantizedTensor& t,
                                  std::span<const float> x,
                                  uint32_t repetitions);

} // namespace icq

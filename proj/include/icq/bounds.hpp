#pragma once

#include <cstdint>
#include <vector>

namespace icq {

// Expected index-storage overhead (bits per weight) when a fraction gamma of
// positions are outliers placed uniformly at random and gaps are coded with
// bit_width-bit tokens:
//     gamma * b * (1 + 1 / (e^{gamma * (2^b - 1)} - 1)).
double lemma1_bound(double gamma, int bit_width);

// Deterministic worst-case overhead for *any* placement of floor(gamma * d)
// outliers in a row of length row_length:
//     ((1 - gamma + 1/d) / (2^b - 1) + gamma) * b.
double lemma2_bound(double gamma, int bit_width, uint32_t row_length);

// A placement attaining the worst case: `leading` outliers at the start of the
// row and the remaining p - leading at the very end, leaving one maximal gap
// in the middle. `leading` must lie in [1, p-1] (p = floor(gamma * d) >= 2).
// Returns ascending 0-based positions.
std::vector<uint32_t> worst_case_indices(uint32_t row_length, double gamma,
                                         uint32_t leading);

enum class PositionModel { uniform, worst_case, clustered };

struct OverheadSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation of per-trial overhead
    double ci_low = 0.0;  // 95% normal CI for the mean
    double ci_high = 0.0;
    double min = 0.0;
    double max = 0.0;
    double lemma1 = 0.0; // closed-form references for the same query
    double lemma2 = 0.0;
    uint32_t trials = 0;
    uint64_t seed = 0;
    PositionModel model = PositionModel::uniform;
};

// Draws `trials` outlier placements under `model`, encodes each with the gap
// codec (whole-row), and summarizes the measured overhead. Models:
//   uniform    - p distinct positions, all placements equally likely
//   worst_case - the adversarial two-run placement, split point random
//   clustered  - positions confined to the first 10% of the row
// Each trial uses an independent stream derived from `seed`.
OverheadSummary simulate_overhead(uint32_t row_length, double gamma, int bit_width,
                                  uint32_t trials, uint64_t seed,
                                  PositionModel model);

// One placement draw under `model` (the simulator's inner step, exposed so
// other modules can reuse identical position distributions).
class SplitMix64;
std::vector<uint32_t> sample_positions(SplitMix64& rng, uint32_t row_length,
                                       uint32_t count, PositionModel model);

// Token width in [3, 12] minimizing lemma1_bound for this gamma (smallest
// width wins ties).
int auto_bit_width(double gamma);

const char* position_model_name(PositionModel model);

} // namespace icq

#include "icq/infer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "icq/bitio.hpp"
#include "icq/container.hpp"
#include "icq/errors.hpp"
#include "icq/parallel.hpp"

namespace icq {

namespace {

void check_vector(const QuantizedTensor& t, std::span<const float> x) {
    if (x.size() != t.d_in)
        throw validation_error("matvec: vector length " + std::to_string(x.size()) +
                               " does not match d_in " + std::to_string(t.d_in));
    for (float v : x)
        if (!std::isfinite(v))
            throw validation_error("matvec: vector contains a non-finite value");
}

float inlier_level(const QuantizedTensor& t, const QuantizedRow& row, size_t i) {
    return t.scheme == Scheme::rtn ? row.inlier_uniform.level(row.inlier_codes[i])
                                   : row.inlier_kmeans.level(row.inlier_codes[i]);
}

float outlier_level(const QuantizedTensor& t, const QuantizedRow& row, size_t i) {
    if (t.scheme == Scheme::rtn) {
        const UniformCodebook& side = row.outlier_signs[i]
                                          ? row.outlier_uniform.negative
                                          : row.outlier_uniform.positive;
        return side.level(row.outlier_codes[i]);
    }
    return row.outlier_kmeans.level(row.outlier_codes[i]);
}

// Streaming decoder over one row's gap tokens: yields the next outlier
// position on demand, handling both whole-row and blockwise layouts.
class PositionStream {
public:
    PositionStream(const GapCode& gaps, uint32_t p, uint32_t d_in)
        : gaps_(gaps), reader_(gaps.bytes), d_in_(d_in), remaining_(p) {
        flag_ = (1u << gaps.bit_width) - 1; // stored pattern of the flag token
        if (gaps_.mode == GapMode::blockwise) {
            block_remaining_ =
                gaps_.per_block_outlier_counts.empty()
                    ? 0
                    : gaps_.per_block_outlier_counts[0];
        } else {
            block_remaining_ = remaining_;
        }
        advance();
    }

    static constexpr uint32_t none = 0xffffffffu;

    uint32_t current() const { return current_; }

    void step() { advance(); }

private:
    void advance() {
        if (remaining_ == 0) {
            current_ = none;
            return;
        }
        while (block_remaining_ == 0) next_block();
        const uint32_t b = gaps_.bit_width;
        for (;;) {
            uint32_t tok = reader_.get(b);
            if (tok == flag_) {
                local_pos_ += flag_; // advance m = 2^b - 1 columns
            } else {
                local_pos_ += tok + 1;
                current_ = block_base_ + local_pos_ - 1;
                --block_remaining_;
                --remaining_;
                return;
            }
        }
    }

    void next_block() {
        ++block_index_;
        reader_.align();
        block_base_ = block_index_ * gaps_.block_size;
        block_remaining_ = gaps_.per_block_outlier_counts[block_index_];
        local_pos_ = 0;
    }

    const GapCode& gaps_;
    detail::BitReader reader_;
    uint32_t d_in_;
    uint32_t remaining_;
    uint32_t flag_ = 0;
    uint32_t current_ = none;
    uint32_t block_index_ = 0;
    uint32_t block_base_ = 0;
    uint32_t block_remaining_ = 0;
    uint32_t local_pos_ = 0;
};

} // namespace

std::vector<double> matvec_fused(const QuantizedTensor& t,
                                 std::span<const float> x) {
    check_vector(t, x);
    std::vector<double> y(t.d_out, 0.0);
    parallel_for(t.d_out, [&](size_t begin, size_t end) {
        for (size_t r = begin; r < end; ++r) {
            const RowQuantization& rq = t.rows[r];
            uint32_t p = static_cast<uint32_t>(rq.row.outlier_codes.size());
            PositionStream stream(rq.gaps, p, t.d_in);
            double acc = 0.0;
            size_t inlier = 0, outlier = 0;
            for (uint32_t c = 0; c < t.d_in; ++c) {
                float w;
                if (stream.current() == c) {
                    w = outlier_level(t, rq.row, outlier++);
                    stream.step();
                } else {
                    w = inlier_level(t, rq.row, inlier++);
                }
                acc += static_cast<double>(w) * static_cast<double>(x[c]);
            }
            y[r] = acc;
        }
    });
    return y;
}

std::vector<double> matvec_predecoded(const QuantizedTensor& t,
                                      std::span<const float> x) {
    check_vector(t, x);
    std::vector<double> y(t.d_out, 0.0);
    parallel_for(t.d_out, [&](size_t begin, size_t end) {
        std::vector<uint8_t> mask(t.d_in);
        for (size_t r = begin; r < end; ++r) {
            const RowQuantization& rq = t.rows[r];
            uint32_t p = static_cast<uint32_t>(rq.row.outlier_codes.size());
            auto positions = decode_gaps(rq.gaps, p, t.d_in);
            std::fill(mask.begin(), mask.end(), 0);
            for (uint32_t pos : positions) mask[pos] = 1;
            double acc = 0.0;
            size_t inlier = 0, outlier = 0;
            for (uint32_t c = 0; c < t.d_in; ++c) {
                float w = mask[c] ? outlier_level(t, rq.row, outlier++)
                                  : inlier_level(t, rq.row, inlier++);
                acc += static_cast<double>(w) * static_cast<double>(x[c]);
            }
            y[r] = acc;
        }
    });
    return y;
}

std::vector<double> matvec_dense_reference(const WeightMatrix& dense,
                                           std::span<const float> x) {
    if (x.size() != dense.cols)
        throw validation_error("matvec: vector length does not match matrix");
    std::vector<double> y(dense.rows, 0.0);
    parallel_for(dense.rows, [&](size_t begin, size_t end) {
        for (size_t r = begin; r < end; ++r) {
            auto row = dense.row(static_cast<uint32_t>(r));
            double acc = 0.0;
            for (uint32_t c = 0; c < dense.cols; ++c)
                acc += static_cast<double>(row[c]) * static_cast<double>(x[c]);
            y[r] = acc;
        }
    });
    return y;
}

ThroughputReport throughput_probe(const QuantizedTensor& t,
                                  std::span<const float> x,
                                  uint32_t repetitions) {
    if (repetitions == 0)
        throw validation_error("throughput_probe: repetitions must be positive");
    check_vector(t, x);

    ThroughputReport rep;
    rep.repetitions = repetitions;
    rep.quantized_bytes = serialized_size(t);
    rep.dense_bytes = static_cast<uint64_t>(t.d_out) * t.d_in * 4;
    WeightMatrix dense = dequantize_matrix(t);

    volatile double sink = 0.0;
    auto time_path = [&](auto&& fn, double& median_s, double& min_s) {
        std::vector<double> samples(repetitions);
        for (uint32_t i = 0; i < repetitions; ++i) {
            auto start = std::chrono::steady_clock::now();
            auto result = fn();
            auto stop = std::chrono::steady_clock::now();
            // Fold the result into a sink so the call cannot be elided.
            sink = sink + (result.empty() ? 0.0 : result[0]);
            samples[i] = std::chrono::duration<double>(stop - start).count();
        }
        std::sort(samples.begin(), samples.end());
        min_s = samples.front();
        median_s = samples[samples.size() / 2];
    };

    time_path([&] { return matvec_fused(t, x); }, rep.fused_median_s,
              rep.fused_min_s);
    time_path([&] { return matvec_predecoded(t, x); }, rep.predecoded_median_s,
              rep.predecoded_min_s);
    time_path([&] { return matvec_dense_reference(dense, x); },
              rep.dense_median_s, rep.dense_min_s);
    return rep;
}

} // namespace icq

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "icq/container.hpp"
#include "icq/errors.hpp"
#include "icq/infer.hpp"
#include "icq/matrix.hpp"
#include "icq/quantizers.hpp"
#include "icq/rng.hpp"

using namespace icq;

namespace {

WeightMatrix gaussian_matrix(uint64_t seed, uint32_t rows, uint32_t cols) {
    WeightMatrix m = WeightMatrix::zeros(rows, cols);
    SplitMix64 rng(seed);
    for (float& v : m.values) v = static_cast<float>(rng.next_gaussian());
    return m;
}

std::vector<float> gaussian_vector(uint64_t seed, uint32_t n) {
    SplitMix64 rng(seed);
    std::vector<float> x(n);
    for (float& v : x) v = static_cast<float>(rng.next_gaussian());
    return x;
}

} // namespace

TEST_CASE("decode-fused, predecoded, and dense paths agree bit for bit") {
    struct Case {
        Scheme scheme;
        GapMode mode;
        uint32_t rows, cols, block;
        double gamma;
        int bits;
    };
    const Case cases[] = {
        {Scheme::rtn, GapMode::whole_row, 9, 513, 0, 0.05, 3},
        {Scheme::rtn, GapMode::blockwise, 9, 513, 100, 0.05, 3},
        {Scheme::sk, GapMode::whole_row, 5, 300, 0, 0.1, 2},
        {Scheme::sk, GapMode::blockwise, 5, 300, 64, 0.1, 2},
        {Scheme::rtn, GapMode::whole_row, 4, 64, 0, 0.0, 4},
        {Scheme::rtn, GapMode::blockwise, 3, 130, 7, 0.2, 4},
    };
    uint64_t seed = 400;
    for (const Case& c : cases) {
        CAPTURE(static_cast<int>(c.scheme));
        CAPTURE(static_cast<int>(c.mode));
        CAPTURE(c.cols);
        WeightMatrix m = gaussian_matrix(seed++, c.rows, c.cols);
        QuantizeConfig cfg;
        cfg.gamma = c.gamma;
        cfg.bits = c.bits;
        cfg.scheme = c.scheme;
        cfg.mode = c.mode;
        cfg.block_size = c.block;
        cfg.seed = seed;
        auto t = quantize_matrix(m, cfg);
        auto x = gaussian_vector(seed + 1000, c.cols);
        auto fused = matvec_fused(t, x);
        auto pre = matvec_predecoded(t, x);
        auto dense = matvec_dense_reference(dequantize_matrix(t), x);
        REQUIRE(fused.size() == c.rows);
        REQUIRE(pre.size() == c.rows);
        REQUIRE(dense.size() == c.rows);
        for (uint32_t r = 0; r < c.rows; ++r) {
            CHECK(fused[r] == pre[r]);   // exact, not approximate
            CHECK(fused[r] == dense[r]);
        }
    }
}

TEST_CASE("one-hot rows route the matching input coordinate through") {
    // d_in = 16 rows, each row is 4x a distinct basis vector. With gamma 0 and
    // 1-bit codes the two levels are exactly 0 and 4, so y[r] = 4 * x[c_r]
    // exactly (both are representable floats).
    const uint32_t n = 16;
    WeightMatrix m = WeightMatrix::zeros(n, n);
    SplitMix64 rng(9001);
    auto target = random_permutation(rng, n);
    for (uint32_t r = 0; r < n; ++r) m.at(r, target[r]) = 4.0f;
    QuantizeConfig cfg;
    cfg.gamma = 0.0;
    cfg.bits = 1;
    auto t = quantize_matrix(m, cfg);
    std::vector<float> x(n);
    for (uint32_t i = 0; i < n; ++i) x[i] = 0.25f * static_cast<float>(i + 1);
    auto y = matvec_fused(t, x);
    for (uint32_t r = 0; r < n; ++r)
        CHECK(y[r] == 4.0 * static_cast<double>(x[target[r]]));
}

TEST_CASE("dense reference equals a hand-rolled dot product") {
    WeightMatrix m = gaussian_matrix(500, 6, 97);
    auto x = gaussian_vector(501, 97);
    auto y = matvec_dense_reference(m, x);
    for (uint32_t r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        for (uint32_t c = 0; c < m.cols; ++c)
            acc += static_cast<double>(m.at(r, c)) * static_cast<double>(x[c]);
        CHECK(y[r] == acc);
    }
}

TEST_CASE("input vector validation") {
    WeightMatrix m = gaussian_matrix(502, 3, 32);
    QuantizeConfig cfg;
    cfg.gamma = 0.1;
    cfg.bits = 3;
    auto t = quantize_matrix(m, cfg);
    std::vector<float> short_x(31, 1.0f);
    CHECK_THROWS_AS(matvec_fused(t, short_x), validation_error);
    CHECK_THROWS_AS(matvec_predecoded(t, short_x), validation_error);
    CHECK_THROWS_AS(matvec_dense_reference(m, short_x), validation_error);
    std::vector<float> nan_x(32, 1.0f);
    nan_x[5] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(matvec_fused(t, nan_x), validation_error);
}

TEST_CASE("throughput probe reports timings and sizes") {
    WeightMatrix m = gaussian_matrix(503, 16, 256);
    QuantizeConfig cfg;
    cfg.gamma = 0.05;
    cfg.bits = 2;
    auto t = quantize_matrix(m, cfg);
    auto x = gaussian_vector(504, 256);
    auto rep = throughput_probe(t, x, 5);
    CHECK(rep.repetitions == 5);
    CHECK(rep.fused_median_s > 0.0);
    CHECK(rep.fused_min_s > 0.0);
    CHECK(rep.fused_min_s <= rep.fused_median_s);
    CHECK(rep.predecoded_min_s <= rep.predecoded_median_s);
    CHECK(rep.dense_min_s <= rep.dense_median_s);
    CHECK(rep.dense_bytes == 16u * 256u * 4u);
    CHECK(rep.quantized_bytes == serialized_size(t));
    CHECK(rep.quantized_bytes < rep.dense_bytes);
    CHECK_THROWS_AS(throughput_probe(t, x, 0), validation_error);
}

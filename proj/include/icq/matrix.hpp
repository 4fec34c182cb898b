#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "icq/errors.hpp"

namespace icq {

// Dense row-major float matrix. Rows are the output dimension (d_out),
// columns the input dimension (d_in), matching y = W x.
struct WeightMatrix {
    uint32_t rows = 0;
    uint32_t cols = 0;
    std::vector<float> values; // row-major, rows * cols entries

    static WeightMatrix zeros(uint32_t r, uint32_t c) {
        WeightMatrix m;
        m.rows = r;
        m.cols = c;
        m.values.assign(static_cast<size_t>(r) * c, 0.0f);
        return m;
    }

    float& at(uint32_t r, uint32_t c) {
        return values[static_cast<size_t>(r) * cols + c];
    }
    float at(uint32_t r, uint32_t c) const {
        return values[static_cast<size_t>(r) * cols + c];
    }

    std::span<const float> row(uint32_t r) const {
        return {values.data() + static_cast<size_t>(r) * cols, cols};
    }
    std::span<float> row(uint32_t r) {
        return {values.data() + static_cast<size_t>(r) * cols, cols};
    }

    void validate() const {
        if (rows == 0 || cols == 0)
            throw validation_error("matrix dimensions must be positive");
        if (values.size() != static_cast<size_t>(rows) * cols)
            throw validation_error("matrix payload size does not match dimensions");
        for (float v : values)
            if (!std::isfinite(v))
                throw validation_error("matrix contains a non-finite value");
    }
};

} // namespace icq

#include "icq/gapcodec.hpp"

#include <string>

#include "icq/bitio.hpp"
#include "icq/errors.hpp"

namespace icq {

namespace {

void validate_positions(std::span<const uint32_t> positions, uint32_t row_length) {
    for (size_t i = 0; i < positions.size(); ++i) {
        if (positions[i] >= row_length)
            throw validation_error("encode_gaps: position " +
                                   std::to_string(positions[i]) +
                                   " is outside the row");
        if (i > 0 && positions[i] <= positions[i - 1])
            throw validation_error("encode_gaps: positions must be strictly ascending");
    }
}

void check_bit_width(int bit_width) {
    if (bit_width < min_gap_bits || bit_width > max_gap_bits)
        throw validation_error("gap bit width must lie in [" +
                               std::to_string(min_gap_bits) + ", " +
                               std::to_string(max_gap_bits) + "]");
}

// Emits the token run for one gap x >= 1. Token value v is stored as v-1.
void emit_gap(detail::BitWriter& w, uint32_t gap, int b, uint32_t& tokens) {
    const uint32_t m = (1u << b) - 1;
    uint32_t flags = (gap - 1) / m;
    uint32_t terminal = ((gap - 1) % m) + 1;
    for (uint32_t f = 0; f < flags; ++f) {
        w.put(m, b); // flag value 2^b, stored pattern all-ones
        ++tokens;
    }
    w.put(terminal - 1, b);
    ++tokens;
}

} // namespace

GapCode encode_gaps(std::span<const uint32_t> positions, uint32_t row_length,
                    int bit_width) {
    check_bit_width(bit_width);
    if (row_length == 0)
        throw validation_error("encode_gaps: row_length must be positive");
    validate_positions(positions, row_length);

    GapCode code;
    code.bit_width = static_cast<uint8_t>(bit_width);
    detail::BitWriter writer(code.bytes);
    uint32_t prev = 0; // 1-based position of the previous outlier
    for (uint32_t pos : positions) {
        uint32_t gap = (pos + 1) - prev;
        emit_gap(writer, gap, bit_width, code.token_count);
        prev = pos + 1;
    }
    writer.align();
    return code;
}

GapCode encode_blockwise(std::span<const uint32_t> positions, uint32_t row_length,
                         int bit_width, uint32_t block_size) {
    check_bit_width(bit_width);
    if (row_length == 0)
        throw validation_error("encode_blockwise: row_length must be positive");
    if (block_size == 0 || block_size > 65535)
        throw validation_error("encode_blockwise: block_size must lie in [1, 65535]");
    validate_positions(positions, row_length);

    GapCode code;
    code.bit_width = static_cast<uint8_t>(bit_width);
    code.mode = GapMode::blockwise;
    code.block_size = block_size;
    detail::BitWriter writer(code.bytes);

    size_t cursor = 0;
    for (uint32_t start = 0; start < row_length; start += block_size) {
        uint32_t end = std::min(row_length, start + block_size);
        code.block_byte_offsets.push_back(static_cast<uint32_t>(code.bytes.size()));
        uint32_t prev = 0; // gap chain restarts per block
        uint32_t count = 0;
        while (cursor < positions.size() && positions[cursor] < end) {
            uint32_t local = positions[cursor] - start + 1;
            emit_gap(writer, local - prev, bit_width, code.token_count);
            prev = local;
            ++count;
            ++cursor;
        }
        code.per_block_outlier_counts.push_back(static_cast<uint16_t>(count));
        writer.align();
    }
    return code;
}

namespace {

// Decodes `expected` outliers from one block-local token stream. Positions are
// appended as `base + local - 1`; `limit` is the number of columns the block
// spans.
void decode_block(detail::BitReader& reader, int b, uint32_t expected,
                  uint32_t base, uint32_t limit, std::vector<uint32_t>& out) {
    const uint32_t m = (1u << b) - 1;
    const uint32_t flag = 1u << b;
    uint64_t pos = 0; // 1-based within the block
    for (uint32_t found = 0; found < expected;) {
        if (!reader.can_read(b))
            throw corruption_error("gap stream exhausted after " +
                                   std::to_string(found) + " of " +
                                   std::to_string(expected) + " outliers");
        uint32_t value = reader.get(b) + 1;
        if (value == flag) {
            pos += m;
            // A flag landing on or past the block end leaves no room for the
            // mandatory terminal, so the stream cannot be valid.
            if (pos >= limit)
                throw corruption_error("flag token advances past the block end");
        } else {
            pos += value;
            if (pos > limit)
                throw corruption_error("decoded outlier position " +
                                       std::to_string(base + pos - 1) +
                                       " is outside the row");
            out.push_back(base + static_cast<uint32_t>(pos) - 1);
            ++found;
        }
    }
}

} // namespace

std::vector<uint32_t> decode_gaps(const GapCode& code, uint32_t expected_outliers,
                                  uint32_t row_length) {
    if (row_length == 0)
        throw validation_error("decode_gaps: row_length must be positive");
    check_bit_width(code.bit_width);
    const int b = code.bit_width;
    std::vector<uint32_t> out;
    out.reserve(expected_outliers);
    detail::BitReader reader(code.bytes);

    if (code.mode == GapMode::whole_row) {
        decode_block(reader, b, expected_outliers, 0, row_length, out);
    } else {
        if (code.block_size == 0)
            throw corruption_error("blockwise gap code with zero block size");
        size_t nblocks = (static_cast<size_t>(row_length) + code.block_size - 1) /
                         code.block_size;
        if (code.per_block_outlier_counts.size() != nblocks)
            throw corruption_error("blockwise gap code has wrong block count");
        uint64_t total = 0;
        for (uint16_t c : code.per_block_outlier_counts) total += c;
        if (total != expected_outliers)
            throw corruption_error("per-block outlier counts sum to " +
                                   std::to_string(total) + ", expected " +
                                   std::to_string(expected_outliers));
        for (size_t blk = 0; blk < nblocks; ++blk) {
            uint32_t start = static_cast<uint32_t>(blk) * code.block_size;
            uint32_t limit = std::min(row_length - start, code.block_size);
            decode_block(reader, b, code.per_block_outlier_counts[blk], start,
                         limit, out);
            reader.align();
        }
    }

    if (!reader.remainder_is_zero_padding())
        throw corruption_error("gap stream carries trailing data after the last outlier");
    return out;
}

double measured_overhead(const GapCode& code, uint32_t row_length) {
    if (row_length == 0)
        throw validation_error("measured_overhead: row_length must be positive");
    double bits = static_cast<double>(code.token_count) * code.bit_width;
    if (code.mode == GapMode::blockwise)
        bits += 16.0 * static_cast<double>(code.per_block_outlier_counts.size());
    return bits / static_cast<double>(row_length);
}

} // namespace icq

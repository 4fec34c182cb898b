#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace icq {

inline constexpr int min_gap_bits = 2;
inline constexpr int max_gap_bits = 15;

enum class GapMode : uint8_t { whole_row = 0, blockwise = 1 };

// Outlier positions encoded as a stream of fixed-width gap tokens.
//
// Positions are converted to 1-based gaps (first gap is measured from
// position 0, each later gap from the previous outlier). A gap x is emitted
// as floor((x-1)/m) flag tokens followed by one terminal token
// ((x-1) mod m) + 1, where m = 2^bit_width - 1. Token values span [1, 2^b];
// the flag value 2^b means "advance m columns, no outlier yet". On the wire a
// token of value v is stored as the b-bit pattern v-1, LSB-first, so the flag
// is all-ones. Exactly one terminal per outlier; the gap after the last
// outlier is never stored.
//
// blockwise mode restarts the gap chain at every block boundary, stores a
// 16-bit outlier count per block, and byte-aligns each block's token stream
// so blocks can be decoded independently.
struct GapCode {
    uint8_t bit_width = 6;
    GapMode mode = GapMode::whole_row;
    uint32_t block_size = 0;  // 0 unless blockwise
    uint32_t token_count = 0; // flags + terminals, across all blocks
    std::vector<uint8_t> bytes;
    std::vector<uint16_t> per_block_outlier_counts; // blockwise only
    std::vector<uint32_t> block_byte_offsets;       // blockwise only; start of each block's stream
};

// Encodes strictly ascending 0-based positions (all < row_length) for one row.
GapCode encode_gaps(std::span<const uint32_t> positions, uint32_t row_length,
                    int bit_width);

// Blockwise variant; block_size must lie in [1, 65535].
GapCode encode_blockwise(std::span<const uint32_t> positions, uint32_t row_length,
                         int bit_width, uint32_t block_size);

// Decodes back to ascending 0-based positions. Throws corruption_error if the
// stream runs out before `expected_outliers` terminals, decodes a position
// beyond row_length, or carries trailing tokens / non-zero padding.
std::vector<uint32_t> decode_gaps(const GapCode& code, uint32_t expected_outliers,
                                  uint32_t row_length);

// Index-storage cost in bits per weight: token_count * bit_width, plus 16 bits
// per block of count metadata in blockwise mode, divided by row_length.
double measured_overhead(const GapCode& code, uint32_t row_length);

} // namespace icq

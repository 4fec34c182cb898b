#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "icq/errors.hpp"

namespace icq::detail {

// LSB-first bit packing into little-endian bytes: the first value written
// occupies the lowest-order bits of the first byte. Both the gap token streams
// and the quantized-code streams use this layout.
class BitWriter {
public:
    explicit BitWriter(std::vector<uint8_t>& out) : out_(out) {}

    void put(uint32_t value, int bits) {
        for (int i = 0; i < bits; ++i) {
            if (bit_ == 0) out_.push_back(0);
            if ((value >> i) & 1u) out_.back() |= static_cast<uint8_t>(1u << bit_);
            bit_ = (bit_ + 1) & 7;
        }
    }

    // Zero-fill to the next byte boundary.
    void align() { bit_ = 0; }

    bool aligned() const { return bit_ == 0; }

    // Bits written so far (pad bits count once align() has run).
    size_t bit_count() const { return out_.size() * 8 - ((8 - bit_) & 7); }

private:
    std::vector<uint8_t>& out_;
    unsigned bit_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    uint32_t get(int bits) {
        uint32_t v = 0;
        for (int i = 0; i < bits; ++i) {
            if (pos_ >= bytes_.size() * 8)
                throw corruption_error("bitstream exhausted");
            size_t byte = pos_ >> 3;
            unsigned bit = pos_ & 7;
            if ((bytes_[byte] >> bit) & 1u) v |= (1u << i);
            ++pos_;
        }
        return v;
    }

    bool can_read(int bits) const { return pos_ + static_cast<size_t>(bits) <= bytes_.size() * 8; }

    void align() { pos_ = (pos_ + 7) & ~size_t{7}; }

    size_t bit_position() const { return pos_; }

    // True iff every remaining bit (at most 7, i.e. final-byte padding) is 0.
    bool remainder_is_zero_padding() const {
        if (bytes_.size() * 8 - pos_ >= 8) return false;
        for (size_t p = pos_; p < bytes_.size() * 8; ++p)
            if ((bytes_[p >> 3] >> (p & 7)) & 1u) return false;
        return true;
    }

private:
    std::span<const uint8_t> bytes_;
    size_t pos_ = 0;
};

} // namespace icq::detail

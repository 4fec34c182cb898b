#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "icq/matrix.hpp"
#include "icq/quantizers.hpp"

namespace icq {

// Raw matrix file ("ICQW", version 1):
//   offset 0  : magic 'I','C','Q','W'
//   offset 4  : u16 version = 1
//   offset 6  : u16 element type = 1 (float32)
//   offset 8  : u32 d_out
//   offset 12 : u32 d_in
//   offset 16 : row-major float32 payload, little-endian
// Loading rejects bad magic/version/type, a payload whose size does not match
// the dimensions exactly, and non-finite values.
uint64_t save_raw(const WeightMatrix& m, std::ostream& out);
uint64_t save_raw_file(const WeightMatrix& m, const std::filesystem::path& path);
WeightMatrix load_raw(std::istream& in);
WeightMatrix load_raw_file(const std::filesystem::path& path);

// Quantized tensor file ("ICQT", version 1):
//   offset 0  : magic 'I','C','Q','T'
//   offset 4  : u32 crc32 (zlib polynomial) over every byte from offset 8 on
//   offset 8  : u16 version = 1
//   offset 10 : u8 scheme (0 = rtn, 1 = sk)
//   offset 11 : u8 code bits
//   offset 12 : u8 gap token bits
//   offset 13 : u8 mode (0 = whole-row, 1 = blockwise)
//   offset 14 : u16 reserved = 0
//   offset 16 : u32 d_out
//   offset 20 : u32 d_in
//   offset 24 : u32 outliers per row
//   offset 28 : u32 block size (0 for whole-row)
//   offset 32 : f64 gamma
//   offset 40 : d_out row sections
//
// Row section: u32 byte length of the rest of the section, then codebooks,
// then the bit payload. Codebooks -- rtn: six f32 (inlier scale/zero, negative
// scale/zero, positive scale/zero; unused sides are zero); sk: u16 count plus
// that many f32 centroids, for inliers then outliers. Whole-row payload packs
// inlier codes, sign bits (rtn), outlier codes, then gap tokens LSB-first and
// zero-pads once to a byte. Blockwise payload pads the fixed streams to a
// byte, then stores u16 per-block outlier counts, then each block's
// byte-aligned gap stream. The gap token count is not stored; decoding stops
// at the p-th terminal token, and the loader verifies the remaining padding is
// zero so every file has exactly one valid encoding.
uint64_t save_quantized(const QuantizedTensor& t, std::ostream& out);
uint64_t save_quantized_file(const QuantizedTensor& t,
                             const std::filesystem::path& path);
QuantizedTensor load_quantized(std::istream& in);
QuantizedTensor load_quantized_file(const std::filesystem::path& path);

// Size in bytes save_quantized would produce, without serializing.
uint64_t serialized_size(const QuantizedTensor& t);

} // namespace icq

#include "icq/container.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "icq/bitio.hpp"
#include "icq/errors.hpp"

namespace icq {

namespace {

// Little-endian scalar helpers; explicit so the format is identical on any
// host.
void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(static_cast<uint8_t>(v));
    b.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_f32(std::vector<uint8_t>& b, float v) {
    put_u32(b, std::bit_cast<uint32_t>(v));
}
void put_f64(std::vector<uint8_t>& b, double v) {
    put_u64(b, std::bit_cast<uint64_t>(v));
}

class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

    uint8_t u8() { return take(1)[0]; }
    uint16_t u16() {
        const uint8_t* p = take(2);
        return static_cast<uint16_t>(p[0] | (p[1] << 8));
    }
    uint32_t u32() {
        const uint8_t* p = take(4);
        return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
               (static_cast<uint32_t>(p[2]) << 16) |
               (static_cast<uint32_t>(p[3]) << 24);
    }
    uint64_t u64() {
        uint64_t lo = u32();
        uint64_t hi = u32();
        return lo | (hi << 32);
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }

    std::span<const uint8_t> bytes(size_t n) { return {take(n), n}; }

    size_t offset() const { return pos_; }
    size_t remaining() const { return size_ - pos_; }

private:
    const uint8_t* take(size_t n) {
        if (n > size_ - pos_)
            throw parse_error("file truncated at offset " + std::to_string(pos_));
        const uint8_t* p = data_ + pos_;
        pos_ += n;
        return p;
    }
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

std::vector<uint8_t> read_all(std::istream& in) {
    std::vector<uint8_t> data;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        data.insert(data.end(), buf, buf + in.gcount());
    if (in.bad()) throw io_error("read failed");
    return data;
}

void write_all(std::ostream& out, const std::vector<uint8_t>& data) {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw io_error("write failed");
}

} // namespace

// ---------------------------------------------------------------------------
// Raw matrices

uint64_t save_raw(const WeightMatrix& m, std::ostream& out) {
    m.validate();
    std::vector<uint8_t> buf;
    buf.reserve(16 + m.values.size() * 4);
    buf.insert(buf.end(), {'I', 'C', 'Q', 'W'});
    put_u16(buf, 1); // version
    put_u16(buf, 1); // element type: float32
    put_u32(buf, m.rows);
    put_u32(buf, m.cols);
    for (float v : m.values) put_f32(buf, v);
    write_all(out, buf);
    return buf.size();
}

uint64_t save_raw_file(const WeightMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    return save_raw(m, out);
}

WeightMatrix load_raw(std::istream& in) {
    std::vector<uint8_t> data = read_all(in);
    ByteReader r(data.data(), data.size());
    auto magic = r.bytes(4);
    if (std::memcmp(magic.data(), "ICQW", 4) != 0)
        throw parse_error("bad magic: not a raw matrix file");
    uint16_t version = r.u16();
    if (version != 1)
        throw parse_error("unsupported raw matrix version " + std::to_string(version));
    uint16_t elem = r.u16();
    if (elem != 1)
        throw parse_error("unsupported element type " + std::to_string(elem));
    WeightMatrix m;
    m.rows = r.u32();
    m.cols = r.u32();
    if (m.rows == 0 || m.cols == 0)
        throw parse_error("raw matrix header has zero dimension");
    uint64_t expected = static_cast<uint64_t>(m.rows) * m.cols * 4;
    if (r.remaining() != expected)
        throw parse_error("raw matrix payload is " + std::to_string(r.remaining()) +
                          " bytes, header implies " + std::to_string(expected));
    m.values.resize(static_cast<size_t>(m.rows) * m.cols);
    for (float& v : m.values) {
        v = r.f32();
        if (!std::isfinite(v))
            throw parse_error("raw matrix payload contains a non-finite value");
    }
    return m;
}

WeightMatrix load_raw_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string() + " for reading");
    return load_raw(in);
}

// ---------------------------------------------------------------------------
// Quantized tensors

namespace {

void validate_tensor(const QuantizedTensor& t) {
    if (t.d_out == 0 || t.d_in == 0)
        throw validation_error("tensor dimensions must be positive");
    if (t.bits < 1 || t.bits > 8)
        throw validation_error("tensor code width must lie in [1, 8]");
    if (t.gap_bits < min_gap_bits || t.gap_bits > max_gap_bits)
        throw validation_error("tensor gap width is out of range");
    if (!(t.gamma >= 0.0 && t.gamma <= 0.5))
        throw validation_error("tensor gamma must lie in [0, 0.5]");
    uint32_t p = static_cast<uint32_t>(
        std::floor(t.gamma * static_cast<double>(t.d_in)));
    if (p != t.outliers_per_row)
        throw validation_error("tensor outlier count does not match gamma");
    if (t.mode == GapMode::blockwise &&
        (t.block_size == 0 || t.block_size > 65535))
        throw validation_error("blockwise tensor needs block size in [1, 65535]");
    if (t.mode == GapMode::whole_row && t.block_size != 0)
        throw validation_error("whole-row tensor must have block size 0");
    if (t.rows.size() != t.d_out)
        throw validation_error("tensor row count does not match d_out");
    if (t.scheme == Scheme::rtn && p > 0 && t.bits < 2)
        throw validation_error("rtn outliers need a code width of at least 2");

    uint32_t max_code = (1u << t.bits) - 1;
    uint32_t max_outlier_code =
        t.scheme == Scheme::rtn ? (1u << (t.bits - 1)) - 1 : max_code;
    for (size_t rI = 0; rI < t.rows.size(); ++rI) {
        const RowQuantization& rq = t.rows[rI];
        auto fail = [&](const std::string& msg) {
            throw validation_error("row " + std::to_string(rI) + ": " + msg);
        };
        if (rq.row.inlier_codes.size() != t.d_in - p)
            fail("inlier code count mismatch");
        if (rq.row.outlier_codes.size() != p) fail("outlier code count mismatch");
        for (uint8_t c : rq.row.inlier_codes)
            if (c > max_code) fail("inlier code out of range");
        for (uint8_t c : rq.row.outlier_codes)
            if (c > max_outlier_code) fail("outlier code out of range");
        if (t.scheme == Scheme::rtn) {
            if (rq.row.outlier_signs.size() != p) fail("sign count mismatch");
            for (uint8_t s : rq.row.outlier_signs)
                if (s > 1) fail("sign bit out of range");
        } else {
            if (!rq.row.outlier_signs.empty()) fail("sk rows carry no sign bits");
            size_t k_in = rq.row.inlier_kmeans.centroids.size();
            size_t k_out = rq.row.outlier_kmeans.centroids.size();
            if (k_in == 0 || k_in > 256) fail("inlier centroid count out of range");
            if ((p == 0) != (k_out == 0)) fail("outlier centroid count mismatch");
            if (k_out > 256) fail("outlier centroid count out of range");
            for (size_t i = 1; i < k_in; ++i)
                if (!(rq.row.inlier_kmeans.centroids[i - 1] <
                      rq.row.inlier_kmeans.centroids[i]))
                    fail("inlier centroids must be strictly ascending");
            for (size_t i = 1; i < k_out; ++i)
                if (!(rq.row.outlier_kmeans.centroids[i - 1] <
                      rq.row.outlier_kmeans.centroids[i]))
                    fail("outlier centroids must be strictly ascending");
            for (uint8_t c : rq.row.inlier_codes)
                if (c >= k_in) fail("inlier code exceeds centroid count");
            for (uint8_t c : rq.row.outlier_codes)
                if (c >= k_out) fail("outlier code exceeds centroid count");
        }
        if (rq.gaps.bit_width != t.gap_bits) fail("gap width mismatch");
        if (rq.gaps.mode != t.mode) fail("gap mode mismatch");
        if (t.mode == GapMode::blockwise && rq.gaps.block_size != t.block_size)
            fail("gap block size mismatch");
        // Decoding validates the token stream itself (terminal count, bounds,
        // padding) before anything is written.
        auto positions = decode_gaps(rq.gaps, p, t.d_in);
        if (positions.size() != p) fail("gap stream decodes to wrong outlier count");
    }
}

void append_codebooks(std::vector<uint8_t>& buf, const QuantizedTensor& t,
                      const QuantizedRow& row) {
    if (t.scheme == Scheme::rtn) {
        put_f32(buf, row.inlier_uniform.scale);
        put_f32(buf, row.inlier_uniform.zero_point);
        put_f32(buf, row.outlier_uniform.negative.scale);
        put_f32(buf, row.outlier_uniform.negative.zero_point);
        put_f32(buf, row.outlier_uniform.positive.scale);
        put_f32(buf, row.outlier_uniform.positive.zero_point);
    } else {
        put_u16(buf, static_cast<uint16_t>(row.inlier_kmeans.centroids.size()));
        for (float c : row.inlier_kmeans.centroids) put_f32(buf, c);
        put_u16(buf, static_cast<uint16_t>(row.outlier_kmeans.centroids.size()));
        for (float c : row.outlier_kmeans.centroids) put_f32(buf, c);
    }
}

void append_fixed_streams(detail::BitWriter& w, const QuantizedTensor& t,
                          const QuantizedRow& row) {
    for (uint8_t c : row.inlier_codes) w.put(c, t.bits);
    if (t.scheme == Scheme::rtn)
        for (uint8_t s : row.outlier_signs) w.put(s, 1);
    int outlier_bits = t.scheme == Scheme::rtn ? t.bits - 1 : t.bits;
    if (outlier_bits > 0)
        for (uint8_t c : row.outlier_codes) w.put(c, outlier_bits);
}

std::vector<uint8_t> serialize_row(const QuantizedTensor& t,
                                   const RowQuantization& rq) {
    std::vector<uint8_t> sec;
    append_codebooks(sec, t, rq.row);
    if (t.mode == GapMode::whole_row) {
        // One combined stream, one terminal zero-pad.
        std::vector<uint8_t> stream;
        detail::BitWriter w(stream);
        append_fixed_streams(w, t, rq.row);
        detail::BitReader tokens(rq.gaps.bytes);
        for (uint32_t i = 0; i < rq.gaps.token_count; ++i)
            w.put(tokens.get(t.gap_bits), t.gap_bits);
        w.align();
        sec.insert(sec.end(), stream.begin(), stream.end());
    } else {
        std::vector<uint8_t> fixed;
        detail::BitWriter w(fixed);
        append_fixed_streams(w, t, rq.row);
        w.align();
        sec.insert(sec.end(), fixed.begin(), fixed.end());
        for (uint16_t c : rq.gaps.per_block_outlier_counts) put_u16(sec, c);
        // Block streams are already independently byte-aligned.
        sec.insert(sec.end(), rq.gaps.bytes.begin(), rq.gaps.bytes.end());
    }
    return sec;
}

std::vector<uint8_t> serialize_tensor(const QuantizedTensor& t) {
    validate_tensor(t);
    std::vector<uint8_t> buf;
    buf.insert(buf.end(), {'I', 'C', 'Q', 'T'});
    put_u32(buf, 0); // crc placeholder
    put_u16(buf, 1); // version
    buf.push_back(static_cast<uint8_t>(t.scheme));
    buf.push_back(t.bits);
    buf.push_back(t.gap_bits);
    buf.push_back(static_cast<uint8_t>(t.mode));
    put_u16(buf, 0); // reserved
    put_u32(buf, t.d_out);
    put_u32(buf, t.d_in);
    put_u32(buf, t.outliers_per_row);
    put_u32(buf, t.block_size);
    put_f64(buf, t.gamma);
    for (const RowQuantization& rq : t.rows) {
        std::vector<uint8_t> sec = serialize_row(t, rq);
        put_u32(buf, static_cast<uint32_t>(sec.size()));
        buf.insert(buf.end(), sec.begin(), sec.end());
    }
    uint32_t crc = static_cast<uint32_t>(
        crc32(0, buf.data() + 8, static_cast<uInt>(buf.size() - 8)));
    buf[4] = static_cast<uint8_t>(crc);
    buf[5] = static_cast<uint8_t>(crc >> 8);
    buf[6] = static_cast<uint8_t>(crc >> 16);
    buf[7] = static_cast<uint8_t>(crc >> 24);
    return buf;
}

} // namespace

uint64_t save_quantized(const QuantizedTensor& t, std::ostream& out) {
    std::vector<uint8_t> buf = serialize_tensor(t);
    write_all(out, buf);
    return buf.size();
}

uint64_t save_quantized_file(const QuantizedTensor& t,
                             const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    return save_quantized(t, out);
}

uint64_t serialized_size(const QuantizedTensor& t) {
    return serialize_tensor(t).size();
}

namespace {

UniformCodebook read_uniform(ByteReader& r, uint8_t bits) {
    UniformCodebook cb;
    cb.bits = bits;
    cb.scale = r.f32();
    cb.zero_point = r.f32();
    if (!std::isfinite(cb.scale) || !std::isfinite(cb.zero_point))
        throw corruption_error("codebook parameter is non-finite");
    return cb;
}

KMeansCodebook read_kmeans(ByteReader& r, size_t max_levels, bool allow_empty,
                           const char* what) {
    uint16_t k = r.u16();
    if (k == 0 && !allow_empty)
        throw corruption_error(std::string(what) + " codebook is empty");
    if (k > max_levels)
        throw corruption_error(std::string(what) + " codebook has " +
                               std::to_string(k) + " levels, limit is " +
                               std::to_string(max_levels));
    KMeansCodebook cb;
    cb.centroids.resize(k);
    for (uint16_t i = 0; i < k; ++i) {
        cb.centroids[i] = r.f32();
        if (!std::isfinite(cb.centroids[i]))
            throw corruption_error(std::string(what) + " centroid is non-finite");
        if (i > 0 && !(cb.centroids[i - 1] < cb.centroids[i]))
            throw corruption_error(std::string(what) +
                                   " centroids are not strictly ascending");
    }
    return cb;
}

} // namespace

QuantizedTensor load_quantized(std::istream& in) {
    std::vector<uint8_t> data = read_all(in);
    if (data.size() < 40) throw parse_error("file too small for a tensor header");
    ByteReader r(data.data(), data.size());
    auto magic = r.bytes(4);
    if (std::memcmp(magic.data(), "ICQT", 4) != 0)
        throw parse_error("bad magic: not a quantized tensor file");
    uint32_t stored_crc = r.u32();
    uint32_t actual_crc = static_cast<uint32_t>(
        crc32(0, data.data() + 8, static_cast<uInt>(data.size() - 8)));
    if (stored_crc != actual_crc)
        throw corruption_error("checksum mismatch: stored " +
                               std::to_string(stored_crc) + ", computed " +
                               std::to_string(actual_crc));
    uint16_t version = r.u16();
    if (version != 1)
        throw parse_error("unsupported tensor version " + std::to_string(version));

    QuantizedTensor t;
    uint8_t scheme = r.u8();
    if (scheme > 1)
        throw parse_error("unknown scheme " + std::to_string(scheme));
    t.scheme = static_cast<Scheme>(scheme);
    t.bits = r.u8();
    t.gap_bits = r.u8();
    uint8_t mode = r.u8();
    if (mode > 1) throw parse_error("unknown gap mode " + std::to_string(mode));
    t.mode = static_cast<GapMode>(mode);
    uint16_t reserved = r.u16();
    if (reserved != 0)
        throw parse_error("reserved header field must be zero");
    t.d_out = r.u32();
    t.d_in = r.u32();
    t.outliers_per_row = r.u32();
    t.block_size = r.u32();
    t.gamma = r.f64();

    if (t.d_out == 0 || t.d_in == 0)
        throw parse_error("tensor header has zero dimension");
    if (t.bits < 1 || t.bits > 8)
        throw parse_error("tensor code width out of range");
    if (t.gap_bits < min_gap_bits || t.gap_bits > max_gap_bits)
        throw parse_error("tensor gap width out of range");
    if (!(t.gamma >= 0.0 && t.gamma <= 0.5))
        throw parse_error("tensor gamma out of range");
    uint32_t p_expected = static_cast<uint32_t>(
        std::floor(t.gamma * static_cast<double>(t.d_in)));
    if (t.outliers_per_row != p_expected)
        throw corruption_error("outlier count " + std::to_string(t.outliers_per_row) +
                               " does not match gamma (expected " +
                               std::to_string(p_expected) + ")");
    if (t.scheme == Scheme::rtn && t.outliers_per_row > 0 && t.bits < 2)
        throw parse_error("rtn tensor with outliers needs code width >= 2");
    if (t.mode == GapMode::blockwise) {
        if (t.block_size == 0 || t.block_size > 65535)
            throw parse_error("blockwise tensor block size out of range");
    } else if (t.block_size != 0) {
        throw parse_error("whole-row tensor must have block size 0");
    }

    const uint32_t p = t.outliers_per_row;
    const uint32_t inliers = t.d_in - p;
    const int outlier_bits = t.scheme == Scheme::rtn ? t.bits - 1 : t.bits;
    t.rows.reserve(t.d_out);

    for (uint32_t row = 0; row < t.d_out; ++row) {
        size_t row_offset = r.offset();
        uint32_t sec_len = r.u32();
        if (sec_len > r.remaining())
            throw parse_error("row " + std::to_string(row) + " section at offset " +
                              std::to_string(row_offset) + " overruns the file");
        ByteReader sec(data.data() + r.offset(), sec_len);
        r.bytes(sec_len); // consume

        RowQuantization rq;
        uint32_t k_in = 1u << t.bits;
        uint32_t k_out = t.scheme == Scheme::rtn ? (1u << (t.bits - 1)) : k_in;
        if (t.scheme == Scheme::rtn) {
            rq.row.inlier_uniform = read_uniform(sec, t.bits);
            rq.row.outlier_uniform.negative =
                read_uniform(sec, static_cast<uint8_t>(t.bits - 1));
            rq.row.outlier_uniform.positive =
                read_uniform(sec, static_cast<uint8_t>(t.bits - 1));
        } else {
            rq.row.inlier_kmeans = read_kmeans(sec, k_in, false, "inlier");
            rq.row.outlier_kmeans = read_kmeans(sec, k_out, p == 0, "outlier");
            if (p > 0 && rq.row.outlier_kmeans.centroids.empty())
                throw corruption_error("outlier codebook is empty but row has outliers");
            if (p == 0 && !rq.row.outlier_kmeans.centroids.empty())
                throw corruption_error("outlier codebook present but row has no outliers");
            k_in = static_cast<uint32_t>(rq.row.inlier_kmeans.centroids.size());
            k_out = static_cast<uint32_t>(rq.row.outlier_kmeans.centroids.size());
        }

        auto payload = sec.bytes(sec.remaining());
        detail::BitReader bits_in(payload);
        rq.row.inlier_codes.resize(inliers);
        for (uint32_t i = 0; i < inliers; ++i) {
            uint32_t c = bits_in.get(t.bits);
            if (t.scheme == Scheme::sk && c >= k_in)
                throw corruption_error("inlier code exceeds centroid count");
            rq.row.inlier_codes[i] = static_cast<uint8_t>(c);
        }
        if (t.scheme == Scheme::rtn) {
            rq.row.outlier_signs.resize(p);
            for (uint32_t i = 0; i < p; ++i)
                rq.row.outlier_signs[i] = static_cast<uint8_t>(bits_in.get(1));
        }
        rq.row.outlier_codes.resize(p);
        if (outlier_bits > 0) {
            for (uint32_t i = 0; i < p; ++i) {
                uint32_t c = bits_in.get(outlier_bits);
                if (t.scheme == Scheme::sk && c >= k_out)
                    throw corruption_error("outlier code exceeds centroid count");
                rq.row.outlier_codes[i] = static_cast<uint8_t>(c);
            }
        }

        rq.gaps.bit_width = t.gap_bits;
        rq.gaps.mode = t.mode;
        if (t.mode == GapMode::whole_row) {
            // Re-pack the remaining tokens canonically; decode_gaps then
            // verifies terminal count, bounds, and padding.
            detail::BitWriter w(rq.gaps.bytes);
            const uint32_t flag_pattern = (1u << t.gap_bits) - 1;
            uint32_t terminals = 0;
            while (terminals < p) {
                if (!bits_in.can_read(t.gap_bits))
                    throw corruption_error("row " + std::to_string(row) +
                                           ": gap stream exhausted");
                uint32_t tok = bits_in.get(t.gap_bits);
                w.put(tok, t.gap_bits);
                ++rq.gaps.token_count;
                if (tok != flag_pattern) ++terminals;
                if (rq.gaps.token_count > sec_len * 8 / t.gap_bits + 1)
                    throw corruption_error("gap stream refuses to terminate");
            }
            w.align();
            if (!bits_in.remainder_is_zero_padding())
                throw corruption_error("row " + std::to_string(row) +
                                       ": trailing bits after the gap stream");
        } else {
            bits_in.align();
            size_t fixed_bytes = bits_in.bit_position() / 8;
            ByteReader tail(payload.data() + fixed_bytes,
                            payload.size() - fixed_bytes);
            size_t nblocks =
                (static_cast<size_t>(t.d_in) + t.block_size - 1) / t.block_size;
            rq.gaps.block_size = t.block_size;
            uint64_t total = 0;
            for (size_t blk = 0; blk < nblocks; ++blk) {
                uint16_t c = tail.u16();
                rq.gaps.per_block_outlier_counts.push_back(c);
                total += c;
            }
            if (total != p)
                throw corruption_error("per-block outlier counts sum to " +
                                       std::to_string(total) + ", expected " +
                                       std::to_string(p));
            // The remaining bytes are the concatenated per-block streams;
            // their internal consistency is checked by decoding below.
            auto streams = tail.bytes(tail.remaining());
            rq.gaps.bytes.assign(streams.begin(), streams.end());
            detail::BitReader scan(rq.gaps.bytes);
            for (size_t blk = 0; blk < nblocks; ++blk) {
                rq.gaps.block_byte_offsets.push_back(
                    static_cast<uint32_t>(scan.bit_position() / 8));
                uint32_t expected = rq.gaps.per_block_outlier_counts[blk];
                const uint32_t flag_pattern = (1u << t.gap_bits) - 1;
                uint32_t terminals = 0;
                while (terminals < expected) {
                    if (!scan.can_read(t.gap_bits))
                        throw corruption_error("row " + std::to_string(row) +
                                               ": blockwise gap stream exhausted");
                    uint32_t tok = scan.get(t.gap_bits);
                    ++rq.gaps.token_count;
                    if (tok != flag_pattern) ++terminals;
                }
                scan.align();
            }
            if (!scan.remainder_is_zero_padding())
                throw corruption_error("row " + std::to_string(row) +
                                       ": trailing bytes after block gap streams");
        }

        // Full positional validation (bounds, padding) in one place.
        auto positions = decode_gaps(rq.gaps, p, t.d_in);
        if (positions.size() != p)
            throw corruption_error("row " + std::to_string(row) +
                                   ": gap stream decodes to wrong outlier count");
        t.rows.push_back(std::move(rq));
    }

    if (r.remaining() != 0)
        throw parse_error("unexpected " + std::to_string(r.remaining()) +
                          " trailing bytes after the last row");
    return t;
}

QuantizedTensor load_quantized_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string() + " for reading");
    return load_quantized(in);
}

} // namespace icq

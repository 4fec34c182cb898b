#include "icq/quantizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "icq/bounds.hpp"
#include "icq/errors.hpp"
#include "icq/parallel.hpp"
#include "icq/partition.hpp"
#include "icq/rng.hpp"

namespace icq {

namespace {

void check_code_bits(int bits) {
    if (bits < 1 || bits > 8)
        throw validation_error("code width must lie in [1, 8]");
}

void check_finite(std::span<const float> values, const char* what) {
    for (float v : values)
        if (!std::isfinite(v))
            throw validation_error(std::string(what) + " contain a non-finite value");
}

} // namespace

uint32_t UniformCodebook::quantize(float v) const {
    if (scale == 0.0f) return 0;
    // Double-precision staging keeps the rounding decision identical across
    // build flags; lround rounds halfway cases away from zero.
    double t = (static_cast<double>(v) - static_cast<double>(zero_point)) /
               static_cast<double>(scale);
    long c = std::lround(t);
    long top = (1l << bits) - 1;
    if (c < 0) c = 0;
    if (c > top) c = top;
    return static_cast<uint32_t>(c);
}

uint32_t KMeansCodebook::assign(float v) const {
    // Boundaries are centroid midpoints; lower_bound sends a value sitting
    // exactly on a midpoint to the lower code.
    uint32_t lo = 0;
    uint32_t hi = static_cast<uint32_t>(centroids.size()) - 1;
    while (lo < hi) {
        uint32_t mid = (lo + hi) / 2;
        double boundary = 0.5 * (static_cast<double>(centroids[mid]) +
                                 static_cast<double>(centroids[mid + 1]));
        if (static_cast<double>(v) <= boundary)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

std::pair<UniformCodebook, std::vector<uint8_t>>
rtn_fit_quantize(std::span<const float> values, int bits) {
    check_code_bits(bits);
    if (values.empty())
        throw validation_error("rtn_fit_quantize: values must be non-empty");
    check_finite(values, "rtn values");

    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    float lo = *lo_it;
    float hi = *hi_it;
    UniformCodebook cb;
    cb.bits = static_cast<uint8_t>(bits);
    cb.zero_point = lo;
    uint32_t levels = 1u << bits;
    cb.scale = levels > 1 ? (hi - lo) / static_cast<float>(levels - 1) : 0.0f;
    if (!std::isfinite(cb.scale))
        throw validation_error("rtn_fit_quantize: value range overflows float");

    std::vector<uint8_t> codes(values.size());
    for (size_t i = 0; i < values.size(); ++i)
        codes[i] = static_cast<uint8_t>(cb.quantize(values[i]));
    return {cb, std::move(codes)};
}

RtnOutlierResult rtn_outlier_quantize(std::span<const float> values, int bits) {
    if (bits < 2 || bits > 8)
        throw validation_error("outlier code width must lie in [2, 8]");
    check_finite(values, "outlier values");

    std::vector<float> neg, pos;
    for (float v : values)
        (v < 0.0f ? neg : pos).push_back(v);

    RtnOutlierResult r;
    std::vector<uint8_t> neg_codes, pos_codes;
    if (!neg.empty())
        std::tie(r.codebook.negative, neg_codes) = rtn_fit_quantize(neg, bits - 1);
    if (!pos.empty())
        std::tie(r.codebook.positive, pos_codes) = rtn_fit_quantize(pos, bits - 1);

    r.signs.reserve(values.size());
    r.codes.reserve(values.size());
    size_t ni = 0, pi = 0;
    for (float v : values) {
        if (v < 0.0f) {
            r.signs.push_back(1);
            r.codes.push_back(neg_codes[ni++]);
        } else {
            r.signs.push_back(0);
            r.codes.push_back(pos_codes[pi++]);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Weighted 1-D k-means

namespace {

struct SortedData {
    std::vector<double> values;  // ascending
    std::vector<double> weights; // aligned
    double total_weight = 0.0;
};

SortedData sort_data(std::span<const float> values, std::span<const float> weights) {
    SortedData d;
    size_t n = values.size();
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });
    d.values.reserve(n);
    d.weights.reserve(n);
    for (uint32_t i : order) {
        d.values.push_back(values[i]);
        double w = weights.empty() ? 1.0 : weights[i];
        d.weights.push_back(w);
        d.total_weight += w;
    }
    return d;
}

// Assignment by two-pointer sweep over sorted values; returns cluster ranges
// [starts[c], starts[c+1]).
std::vector<size_t> assign_ranges(const SortedData& d,
                                  const std::vector<double>& centroids) {
    size_t k = centroids.size();
    std::vector<size_t> starts(k + 1, d.values.size());
    starts[0] = 0;
    size_t i = 0;
    for (size_t c = 0; c + 1 < k; ++c) {
        double boundary = 0.5 * (centroids[c] + centroids[c + 1]);
        while (i < d.values.size() && d.values[i] <= boundary) ++i;
        starts[c + 1] = i;
    }
    return starts;
}

double objective_of(const SortedData& d, const std::vector<double>& centroids,
                    const std::vector<size_t>& starts) {
    double obj = 0.0;
    for (size_t c = 0; c < centroids.size(); ++c)
        for (size_t i = starts[c]; i < starts[c + 1]; ++i) {
            double e = d.values[i] - centroids[c];
            obj += d.weights[i] * e * e;
        }
    return obj;
}

std::vector<double> quantile_init(const SortedData& d, uint32_t k) {
    std::vector<double> c(k);
    double cum = 0.0;
    size_t i = 0;
    for (uint32_t j = 0; j < k; ++j) {
        double target = (j + 0.5) / k * d.total_weight;
        while (i + 1 < d.values.size() && cum + d.weights[i] < target)
            cum += d.weights[i++];
        c[j] = d.values[i];
    }
    return c;
}

std::vector<double> kmeanspp_init(const SortedData& d, uint32_t k, SplitMix64& rng) {
    size_t n = d.values.size();
    std::vector<double> centroids;
    centroids.reserve(k);
    // First seed: weighted draw over the data.
    double target = rng.next_unit() * d.total_weight;
    double cum = 0.0;
    size_t first = n - 1;
    for (size_t i = 0; i < n; ++i) {
        cum += d.weights[i];
        if (cum >= target) { first = i; break; }
    }
    centroids.push_back(d.values[first]);
    std::vector<double> dist2(n);
    while (centroids.size() < k) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centroids) {
                double e = d.values[i] - c;
                best = std::min(best, e * e);
            }
            dist2[i] = d.weights[i] * best;
            total += dist2[i];
        }
        if (total <= 0.0) {
            // All mass already sits on chosen centroids; duplicates get
            // repaired by the empty-cluster rule during Lloyd iterations.
            centroids.push_back(centroids.back());
            continue;
        }
        double pick = rng.next_unit() * total;
        double acc = 0.0;
        size_t chosen = n - 1;
        for (size_t i = 0; i < n; ++i) {
            acc += dist2[i];
            if (acc >= pick) { chosen = i; break; }
        }
        centroids.push_back(d.values[chosen]);
    }
    std::sort(centroids.begin(), centroids.end());
    return centroids;
}

struct LloydOutcome {
    std::vector<double> centroids;
    double objective = 0.0;
    uint32_t iterations = 0;
    std::vector<double> history;
};

LloydOutcome lloyd(const SortedData& d, std::vector<double> centroids,
                   const KMeansOptions& opts) {
    size_t k = centroids.size();
    LloydOutcome out;
    double prev_obj = std::numeric_limits<double>::infinity();
    for (uint32_t iter = 0; iter < opts.max_iters; ++iter) {
        std::sort(centroids.begin(), centroids.end());
        auto starts = assign_ranges(d, centroids);

        // Update step: weighted means.
        std::vector<double> updated(k);
        std::vector<bool> empty(k, false);
        for (size_t c = 0; c < k; ++c) {
            double w = 0.0, wv = 0.0;
            for (size_t i = starts[c]; i < starts[c + 1]; ++i) {
                w += d.weights[i];
                wv += d.weights[i] * d.values[i];
            }
            if (w > 0.0) {
                updated[c] = wv / w;
            } else {
                empty[c] = true;
                updated[c] = centroids[c];
            }
        }

        // Empty-cluster repair: re-seed at the value with the largest weighted
        // squared error under the updated non-empty centroids.
        std::vector<double> err;
        bool any_empty = std::any_of(empty.begin(), empty.end(),
                                     [](bool e) { return e; });
        if (any_empty) {
            std::vector<double> live;
            for (size_t c = 0; c < k; ++c)
                if (!empty[c]) live.push_back(updated[c]);
            err.resize(d.values.size());
            for (size_t i = 0; i < d.values.size(); ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (double c : live) {
                    double e = d.values[i] - c;
                    best = std::min(best, e * e);
                }
                err[i] = d.weights[i] * best;
            }
            for (size_t c = 0; c < k; ++c) {
                if (!empty[c]) continue;
                size_t worst =
                    std::max_element(err.begin(), err.end()) - err.begin();
                updated[c] = d.values[worst];
                err[worst] = 0.0;
            }
        }
        std::sort(updated.begin(), updated.end());

        auto new_starts = assign_ranges(d, updated);
        double obj = objective_of(d, updated, new_starts);
        out.history.push_back(obj);
        out.iterations = iter + 1;

        // Lloyd steps cannot increase the objective; tolerate only rounding
        // noise when enforcing that here.
        if (obj > prev_obj * (1.0 + 1e-10) + 1e-300)
            throw error("k-means objective increased between iterations");

        double movement = 0.0;
        double scale = 1.0;
        for (size_t c = 0; c < k; ++c) {
            movement = std::max(movement, std::fabs(updated[c] - centroids[c]));
            scale = std::max(scale, std::fabs(updated[c]));
        }
        centroids = std::move(updated);
        prev_obj = obj;
        if (movement <= opts.tol * scale) break;
    }
    out.centroids = std::move(centroids);
    out.objective = prev_obj;
    return out;
}

} // namespace

KMeansResult weighted_kmeans_fit(std::span<const float> values,
                                 std::span<const float> weights,
                                 const KMeansOptions& opts) {
    if (values.empty())
        throw validation_error("weighted_kmeans_fit: values must be non-empty");
    if (opts.k == 0 || opts.k > 256)
        throw validation_error("weighted_kmeans_fit: k must lie in [1, 256]");
    if (!weights.empty() && weights.size() != values.size())
        throw validation_error("weighted_kmeans_fit: weights length mismatch");
    check_finite(values, "k-means values");
    if (!weights.empty()) {
        double total = 0.0;
        for (float w : weights) {
            if (!(w >= 0.0f))
                throw validation_error("weighted_kmeans_fit: weights must be non-negative");
            total += w;
        }
        if (!(total > 0.0))
            throw validation_error("weighted_kmeans_fit: weights must have positive sum");
    }

    SortedData d = sort_data(values, weights);

    // Fewer distinct values than clusters: collapse to the distinct values.
    std::vector<double> distinct;
    for (double v : d.values)
        if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
    if (distinct.size() <= opts.k) {
        KMeansResult r;
        r.codebook.centroids.assign(distinct.begin(), distinct.end());
        auto starts = assign_ranges(d, distinct);
        r.objective = objective_of(d, distinct, starts);
        r.objective_history.push_back(r.objective);
        return r;
    }

    uint32_t restarts = std::max<uint32_t>(1, opts.restarts);
    LloydOutcome best;
    bool have_best = false;
    for (uint32_t r = 0; r < restarts; ++r) {
        std::vector<double> init;
        if (r == 0) {
            init = quantile_init(d, opts.k);
        } else {
            SplitMix64 rng(derive_seed(opts.seed, r));
            init = kmeanspp_init(d, opts.k, rng);
        }
        LloydOutcome run = lloyd(d, std::move(init), opts);
        if (!have_best || run.objective < best.objective) {
            best = std::move(run);
            have_best = true;
        }
    }

    KMeansResult r;
    r.codebook.centroids.assign(best.centroids.begin(), best.centroids.end());
    r.objective = best.objective;
    r.iterations = best.iterations;
    r.objective_history = std::move(best.history);
    return r;
}

// ---------------------------------------------------------------------------
// Row pipeline

RowQuantization quantize_row(std::span<const float> row, const QuantizeConfig& cfg,
                             std::span<const float> weights) {
    check_code_bits(cfg.bits);
    if (!weights.empty() && weights.size() != row.size())
        throw validation_error("quantize_row: weights length mismatch");

    RowPartition part = partition_row(row, cfg.gamma);
    size_t p = part.outlier_count();
    if (p > 0 && cfg.scheme == Scheme::rtn && cfg.bits < 2)
        throw validation_error("rtn outliers need a code width of at least 2");

    RowQuantization rq;
    uint32_t k = 1u << cfg.bits;

    if (cfg.scheme == Scheme::rtn) {
        std::tie(rq.row.inlier_uniform, rq.row.inlier_codes) =
            rtn_fit_quantize(part.inlier_values, cfg.bits);
        if (p > 0) {
            RtnOutlierResult o = rtn_outlier_quantize(part.outlier_values, cfg.bits);
            rq.row.outlier_uniform = o.codebook;
            rq.row.outlier_signs = std::move(o.signs);
            rq.row.outlier_codes = std::move(o.codes);
        }
    } else {
        // Split the sensitivity weights the same way the values were split.
        std::vector<float> w_in, w_out;
        if (!weights.empty()) {
            w_in.reserve(part.inlier_count());
            w_out.reserve(p);
            size_t next_outlier = 0;
            for (uint32_t c = 0; c < row.size(); ++c) {
                bool is_outlier = next_outlier < p &&
                                  part.outlier_indices[next_outlier] == c;
                if (is_outlier) {
                    w_out.push_back(weights[c]);
                    ++next_outlier;
                } else {
                    w_in.push_back(weights[c]);
                }
            }
        }
        KMeansOptions ko;
        ko.k = k;
        ko.seed = cfg.seed;
        ko.restarts = cfg.kmeans_restarts;
        KMeansResult in = weighted_kmeans_fit(part.inlier_values, w_in, ko);
        rq.row.inlier_kmeans = std::move(in.codebook);
        rq.row.inlier_codes.reserve(part.inlier_count());
        for (float v : part.inlier_values)
            rq.row.inlier_codes.push_back(
                static_cast<uint8_t>(rq.row.inlier_kmeans.assign(v)));
        if (p > 0) {
            KMeansOptions ko_out = ko;
            ko_out.seed = derive_seed(cfg.seed, 0x0f); // independent stream
            KMeansResult out = weighted_kmeans_fit(part.outlier_values, w_out, ko_out);
            rq.row.outlier_kmeans = std::move(out.codebook);
            rq.row.outlier_codes.reserve(p);
            for (float v : part.outlier_values)
                rq.row.outlier_codes.push_back(
                    static_cast<uint8_t>(rq.row.outlier_kmeans.assign(v)));
        }
    }

    int b = cfg.gap_bits != 0 ? cfg.gap_bits : auto_bit_width(std::max(cfg.gamma, 1e-9));
    rq.gaps = cfg.mode == GapMode::whole_row
                  ? encode_gaps(part.outlier_indices, part.row_length, b)
                  : encode_blockwise(part.outlier_indices, part.row_length, b,
                                     cfg.block_size);
    return rq;
}

namespace {

float decode_inlier(const QuantizedRow& row, Scheme scheme, size_t i) {
    return scheme == Scheme::rtn
               ? row.inlier_uniform.level(row.inlier_codes[i])
               : row.inlier_kmeans.level(row.inlier_codes[i]);
}

float decode_outlier(const QuantizedRow& row, Scheme scheme, size_t i) {
    if (scheme == Scheme::rtn) {
        const UniformCodebook& side =
            row.outlier_signs[i] ? row.outlier_uniform.negative
                                 : row.outlier_uniform.positive;
        return side.level(row.outlier_codes[i]);
    }
    return row.outlier_kmeans.level(row.outlier_codes[i]);
}

} // namespace

std::vector<float> dequantize_row(const RowQuantization& rq, Scheme scheme,
                                  uint32_t row_length) {
    uint32_t p = static_cast<uint32_t>(rq.row.outlier_codes.size());
    if (rq.row.inlier_codes.size() + p != row_length)
        throw validation_error("dequantize_row: code counts do not cover the row");
    auto positions = decode_gaps(rq.gaps, p, row_length);

    std::vector<float> out(row_length);
    size_t next_outlier = 0;
    size_t inlier = 0;
    for (uint32_t c = 0; c < row_length; ++c) {
        if (next_outlier < positions.size() && positions[next_outlier] == c) {
            out[c] = decode_outlier(rq.row, scheme, next_outlier);
            ++next_outlier;
        } else {
            out[c] = decode_inlier(rq.row, scheme, inlier++);
        }
    }
    return out;
}

QuantizedTensor quantize_matrix(const WeightMatrix& m, const QuantizeConfig& cfg,
                                const WeightMatrix* weights) {
    m.validate();
    if (weights) {
        weights->validate();
        if (weights->rows != m.rows || weights->cols != m.cols)
            throw validation_error("quantize_matrix: weight matrix shape mismatch");
    }

    QuantizedTensor t;
    t.d_out = m.rows;
    t.d_in = m.cols;
    t.scheme = cfg.scheme;
    t.bits = static_cast<uint8_t>(cfg.bits);
    t.gamma = cfg.gamma;
    t.mode = cfg.mode;
    t.block_size = cfg.mode == GapMode::blockwise ? cfg.block_size : 0;
    t.outliers_per_row = static_cast<uint32_t>(
        std::floor(cfg.gamma * static_cast<double>(m.cols)));
    t.gap_bits = static_cast<uint8_t>(
        cfg.gap_bits != 0 ? cfg.gap_bits : auto_bit_width(std::max(cfg.gamma, 1e-9)));

    t.rows.resize(m.rows);
    parallel_for(m.rows, [&](size_t begin, size_t end) {
        for (size_t r = begin; r < end; ++r) {
            QuantizeConfig row_cfg = cfg;
            row_cfg.gap_bits = t.gap_bits;
            row_cfg.seed = derive_seed(cfg.seed, r);
            std::span<const float> w;
            if (weights) w = weights->row(static_cast<uint32_t>(r));
            t.rows[r] = quantize_row(m.row(static_cast<uint32_t>(r)), row_cfg, w);
        }
    });
    return t;
}

WeightMatrix dequantize_matrix(const QuantizedTensor& t) {
    WeightMatrix m = WeightMatrix::zeros(t.d_out, t.d_in);
    parallel_for(t.d_out, [&](size_t begin, size_t end) {
        for (size_t r = begin; r < end; ++r) {
            auto row = dequantize_row(t.rows[r], t.scheme, t.d_in);
            std::copy(row.begin(), row.end(),
                      m.values.begin() + static_cast<size_t>(r) * t.d_in);
        }
    });
    return m;
}

StorageBreakdown storage_accounting(const QuantizedTensor& t) {
    StorageBreakdown s;
    double total_weights = static_cast<double>(t.d_out) * t.d_in;
    // File header: magic + crc + version/scheme/bits/gap-bits/mode/reserved +
    // dims + p + block size + gamma = 40 bytes.
    s.framing_bits = 40.0 * 8.0;
    for (const RowQuantization& rq : t.rows) {
        s.framing_bits += 32.0; // per-row section byte length
        size_t code_bits = rq.row.inlier_codes.size() * t.bits +
                           rq.row.outlier_signs.size() +
                           rq.row.outlier_codes.size() *
                               (t.scheme == Scheme::rtn ? t.bits - 1 : t.bits);
        s.code_bits += static_cast<double>(code_bits);
        if (t.scheme == Scheme::rtn) {
            s.codebook_bits += 6.0 * 32.0;
        } else {
            s.codebook_bits += 16.0 + 32.0 * rq.row.inlier_kmeans.centroids.size() +
                               16.0 + 32.0 * rq.row.outlier_kmeans.centroids.size();
        }
        size_t gap_bits = static_cast<size_t>(rq.gaps.token_count) * t.gap_bits;
        s.index_bits += static_cast<double>(gap_bits) +
                        16.0 * rq.gaps.per_block_outlier_counts.size();
        // Padding: whole-row sections pad once at the end; blockwise sections
        // pad the fixed streams and every block's gap stream.
        if (t.mode == GapMode::whole_row) {
            size_t payload = code_bits + gap_bits;
            s.framing_bits += static_cast<double>((8 - payload % 8) % 8);
        } else {
            s.framing_bits += static_cast<double>((8 - code_bits % 8) % 8);
            // Blockwise gap bytes are stored as-is, so their padding is the
            // byte total minus the token payload.
            s.framing_bits += static_cast<double>(rq.gaps.bytes.size()) * 8.0 -
                              static_cast<double>(gap_bits);
        }
    }
    s.code_bits /= total_weights;
    s.index_bits /= total_weights;
    s.codebook_bits /= total_weights;
    s.framing_bits /= total_weights;
    return s;
}

GroupedRtn grouped_rtn_baseline(std::span<const float> row, int bits,
                                uint32_t group_size) {
    check_code_bits(bits);
    if (row.empty())
        throw validation_error("grouped_rtn_baseline: row must be non-empty");
    if (group_size == 0)
        throw validation_error("grouped_rtn_baseline: group_size must be positive");

    GroupedRtn g;
    g.group_size = group_size;
    g.codes.reserve(row.size());
    for (size_t start = 0; start < row.size(); start += group_size) {
        size_t len = std::min<size_t>(group_size, row.size() - start);
        auto [cb, codes] = rtn_fit_quantize(row.subspan(start, len), bits);
        g.codebooks.push_back(cb);
        g.codes.insert(g.codes.end(), codes.begin(), codes.end());
    }
    g.storage_bits = static_cast<uint64_t>(row.size()) * bits +
                     static_cast<uint64_t>(g.codebooks.size()) * 64;
    return g;
}

std::vector<float> dequantize_grouped(const GroupedRtn& g) {
    std::vector<float> out;
    out.reserve(g.codes.size());
    for (size_t i = 0; i < g.codes.size(); ++i) {
        const UniformCodebook& cb = g.codebooks[i / g.group_size];
        out.push_back(cb.level(g.codes[i]));
    }
    return out;
}

} // namespace icq

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "icq/errors.hpp"

namespace icq {

// SplitMix64: tiny, fast, and -- unlike std:: distributions -- produces the
// same stream on every platform and standard library. All randomness in the
// project flows through this class so that a (seed, algorithm) pair printed in
// a report is enough to reproduce a run exactly.
//
// Reference sequence (seed 0): 0xe220a8397b1dcdaf, 0x6e789e6aa1b965f4,
// 0x06c45d188009454f.
class SplitMix64 {
public:
    static constexpr const char* algorithm_id = "splitmix64";

    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_unit_open() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    // Unbiased integer in [0, n) via threshold rejection.
    uint64_t next_below(uint64_t n) {
        if (n == 0) throw validation_error("next_below: n must be positive");
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller. One spare value is cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit_open();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Student-t with `dof` degrees of freedom (ratio of a normal to the
    // square root of a scaled chi-square built from `dof` normals).
    double next_student_t(int dof) {
        if (dof < 1) throw validation_error("next_student_t: dof must be >= 1");
        double z = next_gaussian();
        double chi2 = 0.0;
        for (int i = 0; i < dof; ++i) {
            double g = next_gaussian();
            chi2 += g * g;
        }
        return z / std::sqrt(chi2 / static_cast<double>(dof));
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stable per-stream seed derivation: mixes the base seed with a stream index
// so that parallel or per-row streams are independent yet reproducible.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    SplitMix64 mix(base ^ (0x632be59bd9b4e019ull * (stream + 1)));
    return mix.next();
}

// `count` distinct values from [0, population), ascending. Partial
// Fisher-Yates over an index array; O(population) memory, O(population + count)
// time -- fine for the row lengths this project deals with.
inline std::vector<uint32_t> sample_distinct(SplitMix64& rng, uint32_t population,
                                             uint32_t count) {
    if (count > population)
        throw validation_error("sample_distinct: count exceeds population");
    std::vector<uint32_t> pool(population);
    for (uint32_t i = 0; i < population; ++i) pool[i] = i;
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t j = i + static_cast<uint32_t>(rng.next_below(population - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<uint32_t> out(pool.begin(), pool.begin() + count);
    std::sort(out.begin(), out.end());
    return out;
}

// Uniform random permutation of [0, n) (Fisher-Yates).
inline std::vector<uint32_t> random_permutation(SplitMix64& rng, uint32_t n) {
    std::vector<uint32_t> perm(n);
    for (uint32_t i = 0; i < n; ++i) perm[i] = i;
    for (uint32_t i = n; i > 1; --i) {
        uint32_t j = static_cast<uint32_t>(rng.next_below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

} // namespace icq

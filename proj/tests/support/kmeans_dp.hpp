#pragma once

// Exact 1-D weighted k-means by dynamic programming, used as a test oracle.
// O(k * n^2) with prefix sums; fine for the few-hundred-point instances the
// tests use. Returns the optimal sum of w * (v - centroid)^2 over all
// partitions of the sorted values into at most k contiguous clusters
// (contiguity is optimal in 1-D).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace icq_test {

inline double kmeans_dp_objective(std::span<const float> values,
                                  std::span<const float> weights, uint32_t k) {
    size_t n = values.size();
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t b) { return values[a] < values[b]; });

    // Prefix sums of w, w*v, w*v^2 over the sorted sequence.
    std::vector<double> pw(n + 1, 0.0), pwv(n + 1, 0.0), pwv2(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double v = values[order[i]];
        double w = weights.empty() ? 1.0 : weights[order[i]];
        pw[i + 1] = pw[i] + w;
        pwv[i + 1] = pwv[i] + w * v;
        pwv2[i + 1] = pwv2[i] + w * v * v;
    }
    // Weighted SSE of sorted range [i, j).
    auto cost = [&](size_t i, size_t j) {
        double w = pw[j] - pw[i];
        if (w <= 0.0) return 0.0;
        double wv = pwv[j] - pwv[i];
        return std::max(0.0, (pwv2[j] - pwv2[i]) - wv * wv / w);
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(n + 1, inf), cur(n + 1, inf);
    prev[0] = 0.0;
    for (size_t j = 1; j <= n; ++j) prev[j] = cost(0, j); // one cluster
    for (uint32_t c = 2; c <= k; ++c) {
        cur.assign(n + 1, inf);
        cur[0] = 0.0;
        for (size_t j = 1; j <= n; ++j) {
            double best = inf;
            for (size_t i = 0; i < j; ++i) {
                double cand = prev[i] + cost(i, j);
                best = std::min(best, cand);
            }
            cur[j] = std::min(prev[j], best); // "at most c clusters"
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

} // namespace icq_test

#include "icq/parallel.hpp"

#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace icq {

unsigned worker_count() {
    static unsigned cached = [] {
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        if (const char* env = std::getenv("ICQ_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v >= 1 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
        }
        return hw;
    }();
    return cached;
}

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn) {
    unsigned workers = worker_count();
    if (n == 0) return;
    if (workers == 1 || n == 1) {
        fn(0, n);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mu;
    for (unsigned w = 0; w < workers; ++w) {
        size_t begin = w * chunk;
        size_t end = begin + chunk < n ? begin + chunk : n;
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lk(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace icq

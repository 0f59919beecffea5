#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace planebarg {

inline unsigned& default_thread_count() {
    static unsigned count = std::max(1u, std::thread::hardware_concurrency());
    return count;
}

// Static block partition; item i is always processed by the same code path
// regardless of thread count, and each item writes only its own output slot,
// so results are bit-identical for any number of workers.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         unsigned threads = 0) {
    if (threads == 0) threads = default_thread_count();
    if (n == 0) return;
    if (threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

// Compensated (Kahan) accumulator. The oscillatory quadratures in this
// library cancel many orders of magnitude; the compensation term keeps the
// summation error near eps * sum(|terms|) instead of growing with N.
template <typename T>
struct KahanSum {
    T sum{};
    T carry{};

    void add(const T& value) {
        const T y = value - carry;
        const T t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    T get() const { return sum; }
};

}  // namespace planebarg

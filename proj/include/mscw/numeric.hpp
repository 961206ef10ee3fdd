#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace mscw {

// ln cosh(t) without overflow: |t| - ln 2 + ln(1 + e^{-2|t|}).
inline double log_cosh(double t) {
    const double a = std::fabs(t);
    return a - 0.6931471805599453094172321214581766 + std::log1p(std::exp(-2.0 * a));
}

// Neumaier-compensated accumulator; the running error term recovers digits
// lost when summing ~1e6 terms of mixed sign.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// (max, sum of exp(w - max)) pair; merging is associative, so slab results can
// be combined in a fixed tree order independent of thread count.
struct LogSumExp {
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;

    void add(double w) {
        if (w == -std::numeric_limits<double>::infinity()) return;
        if (w <= max) {
            sum += std::exp(w - max);
        } else {
            sum = sum * std::exp(max - w) + 1.0;
            max = w;
        }
    }
    void merge(const LogSumExp& o) {
        if (o.sum == 0.0) return;
        if (sum == 0.0) { *this = o; return; }
        if (o.max <= max) {
            sum += o.sum * std::exp(o.max - max);
        } else {
            sum = sum * std::exp(max - o.max) + o.sum;
            max = o.max;
        }
    }
    double value() const {
        return sum == 0.0 ? -std::numeric_limits<double>::infinity() : max + std::log(sum);
    }
};

// Runs fn(begin, end) over fixed-size slabs of [0, count). The slab partition
// does not depend on the thread count, so reductions that first finish each
// slab sequentially and then merge slabs in index order are deterministic.
inline void parallel_slabs(std::size_t count, int threads,
                           const std::function<void(std::size_t, std::size_t, std::size_t)>& fn,
                           std::size_t slab = 16384) {
    if (count == 0) return;
    const std::size_t nslabs = (count + slab - 1) / slab;
    if (threads <= 1 || nslabs == 1) {
        for (std::size_t s = 0; s < nslabs; ++s)
            fn(s, s * slab, std::min(count, (s + 1) * slab));
        return;
    }
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mtx;
    const int nthr = std::min<std::size_t>(threads, nslabs);
    for (int t = 0; t < nthr; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t s;
                {
                    std::lock_guard<std::mutex> lk(mtx);
                    if (next >= nslabs) return;
                    s = next++;
                }
                fn(s, s * slab, std::min(count, (s + 1) * slab));
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace mscw

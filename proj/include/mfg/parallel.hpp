#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mfg {

/// Worker cap: hardware concurrency, bounded above by MFG_THREADS when set.
inline int worker_count() {
    static const int n = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw < 1) hw = 1;
        if (const char* env = std::getenv("MFG_THREADS")) {
            const int v = std::atoi(env);
            if (v >= 1) hw = std::min(hw, v);
        }
        return hw;
    }();
    return n;
}

/// Chunked loop over [begin, end). Serial for small ranges or a single
/// worker. The callback must write only to slots owned by its index, so
/// the result is identical to the serial order. `workers` <= 0 means the
/// process-wide worker count.
template <class Fn>
void parallel_for(int begin, int end, Fn&& fn, int grain = 512, int workers = 0) {
    const int n = end - begin;
    if (workers <= 0) workers = worker_count();
    workers = std::min(workers, (n + grain - 1) / grain);
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr error;
    std::mutex error_mutex;
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + w * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn, &error, &error_mutex] {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> guard(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace mfg

#include "blend/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace blend {

namespace {
std::atomic<int> g_threads{1};
thread_local bool t_inside = false;
}

void set_thread_count(int n) {
    g_threads.store(n > 0 ? n : std::max(1, static_cast<int>(std::thread::hardware_concurrency())));
}

int thread_count() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (workers <= 1 || t_inside) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    // One slot per chunk; the lowest failing chunk wins, which is the same
    // failure a serial run would hit first.
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        pool.emplace_back([&, w, lo, hi] {
            t_inside = true;
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace blend

#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace semcont {

// Worker count: hardware concurrency capped by the SEMCONT_THREADS variable
// (values < 1 ignored). Results must not depend on the count; parallel_for
// only distributes index ranges, callers own deterministic accumulation.
inline unsigned thread_budget() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("SEMCONT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && static_cast<unsigned long>(v) < n) n = static_cast<unsigned>(v);
    }
    return n;
}

// Runs fn(i) for i in [0,n). Exceptions propagate only on the calling thread's
// own chunk when single-threaded; multi-threaded chunks rethrow after join.
template <typename Fn>
inline void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = thread_budget();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(used);
    for (unsigned w = 0; w < used; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += used) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace semcont

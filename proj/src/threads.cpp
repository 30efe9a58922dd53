#include "fewsel/threads.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>

namespace fewsel {

int effective_threads(int requested) {
    if (requested <= 0) {
        if (const char* env = std::getenv("FEWSEL_THREADS")) {
            const int n = std::atoi(env);
            if (n > 0) requested = n;
        }
    }
    if (requested <= 0) {
        requested = static_cast<int>(std::thread::hardware_concurrency());
        if (requested <= 0) requested = 1;
    }
    return requested;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t nthreads =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
    if (nthreads <= 1) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + nthreads - 1) / nthreads;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace fewsel

#include "oblique/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace oblique {

std::size_t worker_count() {
    if (const char* env = std::getenv("OBLIQUE_WORKERS")) {
        std::size_t n = 0;
        const char* last = env + std::strlen(env);
        auto [ptr, ec] = std::from_chars(env, last, n);
        if (ec == std::errc() && ptr == last && n > 0) return n;
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body,
                  std::size_t min_chunk) {
    if (end <= begin) return;
    const std::size_t count = end - begin;
    const std::size_t workers =
        std::min(worker_count(), (count + std::max<std::size_t>(min_chunk, 1) - 1) / std::max<std::size_t>(min_chunk, 1));
    if (workers <= 1) {
        for (std::size_t k = begin; k < end; ++k) body(k);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&](std::size_t lo, std::size_t hi) {
        try {
            for (std::size_t k = lo; k < hi; ++k) body(k);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo < hi) threads.emplace_back(run, lo, hi);
    }
    run(begin, std::min(end, begin + chunk));
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace oblique

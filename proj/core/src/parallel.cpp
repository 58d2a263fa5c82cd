#include "qrng/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <thread>
#include <vector>

namespace qrng {

std::size_t default_worker_count() {
    if (const char* env = std::getenv("QRNG_THREADS")) {
        std::size_t value = 0;
        const char* end = env + std::strlen(env);
        auto [ptr, ec] = std::from_chars(env, end, value);
        if (ec == std::errc{} && ptr == end && value > 0) {
            return value;
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t grain, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) {
        return;
    }
    grain = std::max<std::size_t>(1, grain);
    if (workers == 0) {
        workers = default_worker_count();
    }
    const std::size_t grains = (n + grain - 1) / grain;
    workers = std::min(workers, grains);
    if (workers <= 1) {
        body(0, n);
        return;
    }

    const std::size_t grains_per_worker = (grains + workers - 1) / workers;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * grains_per_worker * grain;
        const std::size_t end = std::min(n, (w + 1) * grains_per_worker * grain);
        if (begin >= end) {
            break;
        }
        threads.emplace_back([&, w, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace qrng

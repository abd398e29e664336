#include "sheetlight/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sheetlight {

int default_worker_count() {
    if (const char* env = std::getenv("SHEETLIGHT_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

void parallel_for(int count, int workers, const std::function<void(int, int)>& body, int chunk) {
    if (count <= 0) return;
    const int step = std::max(1, chunk);
    const int chunks = (count + step - 1) / step;
    const int threads = std::clamp(workers, 1, chunks);
    if (threads == 1) {
        body(0, count);
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= chunks) return;
            try {
                body(c * step, std::min(count, (c + 1) * step));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(chunks);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(threads - 1));
    for (int t = 1; t < threads; ++t) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace sheetlight

#include "ineq/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ineq {

unsigned default_worker_count()
{
    if (const char* env = std::getenv("INEQ_NUM_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body)
{
    if (count == 0) return;
    workers = std::max(1u, workers);
    if (workers == 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed = true;
            }
        }
    };

    const auto n_threads = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads - 1);
        for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ineq

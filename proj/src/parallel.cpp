#include "mb/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mb {
namespace {

unsigned default_workers() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::atomic<unsigned> g_workers{default_workers()};
thread_local bool t_inside_worker = false;

constexpr std::size_t kMinParallelWork = std::size_t{1} << 15;

} // namespace

unsigned max_workers() { return g_workers.load(std::memory_order_relaxed); }

void set_max_workers(unsigned workers) {
    g_workers.store(std::max(1u, workers), std::memory_order_relaxed);
}

void configure_workers_from_env() {
    if (const char* env = std::getenv("MB_THREADS")) {
        char* end = nullptr;
        long value = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && value > 0) {
            set_max_workers(static_cast<unsigned>(value));
        }
    }
}

void parallel_for(std::size_t count, std::size_t cost_hint,
                  const std::function<void(std::size_t)>& body) {
    unsigned workers = std::min<std::size_t>(max_workers(), count);
    if (t_inside_worker || workers <= 1 || count * std::max<std::size_t>(cost_hint, 1) < kMinParallelWork) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }

    // The failure from the lowest index wins so error reports do not depend
    // on scheduling.
    std::exception_ptr failure;
    std::size_t failure_index = count;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) {
            break;
        }
        threads.emplace_back([&, begin, end] {
            t_inside_worker = true;
            std::size_t i = begin;
            try {
                for (; i < end; ++i) {
                    body(i);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (i < failure_index) {
                    failure_index = i;
                    failure = std::current_exception();
                }
            }
            t_inside_worker = false;
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace mb

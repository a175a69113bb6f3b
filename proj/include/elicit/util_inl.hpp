#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace elicit::util {

template <typename T>
std::vector<T> parallel_map(std::size_t n, std::size_t max_in_flight,
                            const std::function<T(std::size_t)>& task) {
    std::vector<T> results(n);
    if (n == 0) return results;

    const std::size_t workers = std::min(std::max<std::size_t>(max_in_flight, 1), n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) results[i] = task(i);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::size_t first_error_index = n;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                results[i] = task(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (i < first_error_index) {
                    first_error = std::current_exception();
                    first_error_index = i;
                }
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (first_error) std::rethrow_exception(first_error);
    return results;
}

} // namespace elicit::util

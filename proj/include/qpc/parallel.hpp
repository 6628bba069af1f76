// parallel.hpp: tiny fork-join loop; each index writes its own slot so results do not depend on scheduling
#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qpc {

inline int& default_jobs() {
    static int jobs = 1;
    return jobs;
}

template <class F>
void parallel_for(int n, F&& body, int jobs = default_jobs()) {
    jobs = std::clamp(jobs, 1, std::max(1, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::jthread> pool;
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    pool.clear();
    if (err) std::rethrow_exception(err);
}

}  // namespace qpc

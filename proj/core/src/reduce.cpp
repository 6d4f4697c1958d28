#include "mp/reduce.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace mp {

int thread_count() {
    const char* env = std::getenv("MP_THREADS");
    if (!env || !*env) return 1;
    const long v = std::strtol(env, nullptr, 10);
    return static_cast<int>(std::clamp(v, 1L, 64L));
}

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
    const int nt = thread_count();
    if (nt <= 1 || count < 4096) {
        body(0, count);
        return;
    }
    const std::size_t chunk = (count + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t lo = 0; lo < count; lo += chunk) {
        const std::size_t hi = std::min(count, lo + chunk);
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace mp

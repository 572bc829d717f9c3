#pragma once

#include <future>
#include <optional>
#include <thread>
#include <vector>

namespace heegner {

inline unsigned default_thread_count() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

/// Applies fn(0..count-1) possibly concurrently and returns results in index
/// order, so reductions downstream stay bit-reproducible regardless of the
/// thread count.
template <typename T, typename Fn>
std::vector<T> parallel_map_ordered(std::size_t count, Fn&& fn, unsigned threads) {
    std::vector<std::optional<T>> slots(count);
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) slots[i].emplace(fn(i));
    } else {
        const unsigned nt = std::min<std::size_t>(threads, count);
        std::vector<std::future<void>> futs;
        futs.reserve(nt);
        std::atomic<std::size_t> next{0};
        for (unsigned t = 0; t < nt; ++t) {
            futs.push_back(std::async(std::launch::async, [&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    slots[i].emplace(fn(i));
                }
            }));
        }
        for (auto& f : futs) f.get();
    }
    std::vector<T> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

} // namespace heegner

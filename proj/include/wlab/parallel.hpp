#pragma once

// Deterministic chunked parallelism: work is split into fixed-size chunks
// whose boundaries depend only on the problem size, each chunk produces a
// partial result, and partials come back in chunk order so that merging
// them is independent of the number of worker threads.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wlab {

struct ChunkRange {
    std::size_t index;
    std::size_t begin;
    std::size_t end;
};

/// Worker count: WLAB_THREADS if set, else the hardware concurrency.
inline std::size_t default_threads() {
    if (const char* env = std::getenv("WLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

template <class Partial, class Fn>
std::vector<Partial> map_chunks(std::size_t count, std::size_t chunk_size, std::size_t threads,
                                Fn&& fn) {
    chunk_size = std::max<std::size_t>(1, chunk_size);
    const std::size_t chunks = (count + chunk_size - 1) / chunk_size;
    std::vector<Partial> out(chunks);
    if (chunks == 0) return out;

    auto range = [&](std::size_t c) {
        return ChunkRange{c, c * chunk_size, std::min(count, (c + 1) * chunk_size)};
    };
    threads = std::clamp<std::size_t>(threads, 1, chunks);
    if (threads == 1) {
        for (std::size_t c = 0; c < chunks; ++c) out[c] = fn(range(c));
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            try {
                out[c] = fn(range(c));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(chunks);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace wlab

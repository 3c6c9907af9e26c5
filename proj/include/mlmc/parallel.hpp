#ifndef MLMC_PARALLEL_HPP
#define MLMC_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "mlmc/math.hpp"

namespace mlmc {

/// Running sums of sampled values and their squares plus accumulated work.
struct SampleSums {
    double sum = 0;
    double sum_sq = 0;
    double cost = 0;
    long long n = 0;

    double mean() const { return n > 0 ? sum / double(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double v = (sum_sq - sum * sum / double(n)) / double(n - 1);
        return v > 0.0 ? v : 0.0;
    }
    double std_error() const { return n > 1 ? std::sqrt(variance() / double(n)) : 0.0; }
};

namespace detail {
inline constexpr long long kChunk = 512;
}

/// Evaluate f(ctx, i) for i in [first, last) and accumulate (value, cost)
/// sums. Work is split into fixed index-aligned chunks handed to workers
/// dynamically; chunk partials are Kahan-accumulated and merged in chunk
/// order, so the result is bitwise independent of the worker count and
/// schedule. make_ctx() builds one worker-local context (sampler buffers);
/// every sample must derive its randomness from its index i alone.
template <class MakeCtx, class F>
SampleSums sample_in_parallel_ctx(long long first, long long last, int threads,
                                  MakeCtx&& make_ctx, F&& f) {
    SampleSums total;
    if (last <= first) return total;

    // Chunk boundaries at fixed multiples of kChunk from zero.
    const long long c0 = first / detail::kChunk;
    const long long c1 = (last - 1) / detail::kChunk;
    const long long n_chunks = c1 - c0 + 1;

    struct Partial {
        double sum = 0, sum_sq = 0, cost = 0;
        long long n = 0;
    };
    std::vector<Partial> partials((std::size_t)n_chunks);

    auto run_chunk = [&](auto& ctx, long long c) {
        const long long lo = std::max(first, (c0 + c) * detail::kChunk);
        const long long hi = std::min(last, (c0 + c + 1) * detail::kChunk);
        Kahan s, s2, w;
        long long n = 0;
        for (long long i = lo; i < hi; ++i) {
            double value = 0, cost = 0;
            f(ctx, i, value, cost);
            s.add(value);
            s2.add(value * value);
            w.add(cost);
            ++n;
        }
        partials[(std::size_t)c] = {s.value(), s2.value(), w.value(), n};
    };

    int workers = threads <= 0 ? (int)std::thread::hardware_concurrency() : threads;
    workers = (int)std::min<long long>(std::max(workers, 1), n_chunks);

    if (workers <= 1) {
        auto ctx = make_ctx();
        for (long long c = 0; c < n_chunks; ++c) run_chunk(ctx, c);
    } else {
        std::atomic<long long> next{0};
        std::vector<std::thread> pool;
        pool.reserve((std::size_t)workers);
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                auto ctx = make_ctx();
                for (long long c = next.fetch_add(1); c < n_chunks;
                     c = next.fetch_add(1))
                    run_chunk(ctx, c);
            });
        for (auto& th : pool) th.join();
    }

    Kahan s, s2, w;
    for (const Partial& p : partials) {
        s.add(p.sum);
        s2.add(p.sum_sq);
        w.add(p.cost);
        total.n += p.n;
    }
    total.sum = s.value();
    total.sum_sq = s2.value();
    total.cost = w.value();
    return total;
}

/// Context-free variant.
template <class F>
SampleSums sample_in_parallel(long long first, long long last, int threads, F&& f) {
    return sample_in_parallel_ctx(
        first, last, threads, [] { return 0; },
        [&](int&, long long i, double& v, double& c) { f(i, v, c); });
}

} // namespace mlmc

#endif

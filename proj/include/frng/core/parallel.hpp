#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace frng {

// Work is split into chunks derived from the problem size only, never from
// the worker count, so numerical results are identical for any thread count.
// Reductions keep per-chunk partials and merge them in chunk order.
class ThreadPool {
  public:
    static ThreadPool& instance() {
        static ThreadPool pool;
        return pool;
    }

    int workers() const { return static_cast<int>(threads_.size()) + 1; }

    // Runs chunk_fn(c) for c in [0, chunks). Blocks until all chunks finish.
    void run(std::size_t chunks, const std::function<void(std::size_t)>& fn) {
        if (chunks == 0) return;
        if (chunks == 1 || threads_.empty() || in_worker_) {
            for (std::size_t c = 0; c < chunks; ++c) fn(c);
            return;
        }
        {
            std::lock_guard<std::mutex> lk(mu_);
            job_fn_ = &fn;
            job_chunks_ = chunks;
            next_chunk_.store(0, std::memory_order_relaxed);
            pending_.store(static_cast<long>(chunks), std::memory_order_relaxed);
            ++generation_;
        }
        cv_.notify_all();
        work_off(fn, chunks);
        std::unique_lock<std::mutex> lk(mu_);
        done_cv_.wait(lk, [&] { return pending_.load(std::memory_order_acquire) == 0; });
        job_fn_ = nullptr;
    }

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

  private:
    ThreadPool() {
        int n = 0;
        if (const char* env = std::getenv("FRNG_THREADS")) n = std::atoi(env);
        if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
        if (n < 1) n = 1;
        for (int i = 0; i < n - 1; ++i)
            threads_.emplace_back([this] { worker_loop(); });
    }

    void work_off(const std::function<void(std::size_t)>& fn, std::size_t chunks) {
        for (;;) {
            std::size_t c = next_chunk_.fetch_add(1, std::memory_order_relaxed);
            if (c >= chunks) break;
            fn(c);
            if (pending_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
                std::lock_guard<std::mutex> lk(mu_);
                done_cv_.notify_all();
            }
        }
    }

    void worker_loop() {
        in_worker_ = true;
        std::size_t seen = 0;
        for (;;) {
            const std::function<void(std::size_t)>* fn = nullptr;
            std::size_t chunks = 0;
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                fn = job_fn_;
                chunks = job_chunks_;
            }
            if (fn) work_off(*fn, chunks);
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(std::size_t)>* job_fn_ = nullptr;
    std::size_t job_chunks_ = 0;
    std::size_t generation_ = 0;
    std::atomic<std::size_t> next_chunk_{0};
    std::atomic<long> pending_{0};
    bool stop_ = false;
    static thread_local bool in_worker_;
};

inline thread_local bool ThreadPool::in_worker_ = false;

// Invokes body(begin, end) over fixed-size ranges of [0, n).
inline void parallel_for(std::size_t n, std::size_t grain,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    if (grain < 1) grain = 1;
    const std::size_t chunks = (n + grain - 1) / grain;
    ThreadPool::instance().run(chunks, [&](std::size_t c) {
        const std::size_t b = c * grain;
        const std::size_t e = b + grain < n ? b + grain : n;
        body(b, e);
    });
}

// Deterministic chunked reduction: partials merged in chunk order.
template <class T, class Body>
T parallel_reduce_sum(std::size_t n, std::size_t grain, Body&& body) {
    if (n == 0) return T(0);
    if (grain < 1) grain = 1;
    const std::size_t chunks = (n + grain - 1) / grain;
    std::vector<T> partial(chunks, T(0));
    ThreadPool::instance().run(chunks, [&](std::size_t c) {
        const std::size_t b = c * grain;
        const std::size_t e = b + grain < n ? b + grain : n;
        partial[c] = body(b, e);
    });
    T total(0);
    for (const T& p : partial) total += p;
    return total;
}

} // namespace frng

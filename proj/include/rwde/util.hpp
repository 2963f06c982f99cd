#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rwde {

// ---------------------------------------------------------------- errors
//
// All failures surface as typed exceptions so callers (and the CLI) can map
// them to distinct exit codes instead of parsing messages.

// Invalid user-supplied parameters: bad weights, malformed neighborhoods,
// out-of-range configuration.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A hard resource ceiling was hit: path enumeration node budget, walk site
// budget, subset enumeration cap.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numeric procedure could not produce a usable answer: Monte Carlo
// estimate with zero successes, insufficient exceedances for a tail fit,
// non-converged stationary solve.
struct EstimateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- kahan
//
// Compensated accumulator. Used wherever many small positive terms are
// reduced (path weight sums, time-change integrals) so the result does not
// drift with the summation order length.
class KahanSum {
  public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// ---------------------------------------------------------------- threads
//
// Block-partitioned parallel map over [0, n). Worker threads are joined
// before returning; exceptions from the body are rethrown on the caller
// thread. Results must be written by index so the merge order is
// deterministic regardless of scheduling.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (threads == 0) threads = hw;
    if (threads > n) threads = static_cast<unsigned>(n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::mutex err_mu;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load(std::memory_order_relaxed)) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!failed.exchange(true)) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(err);
}

}  // namespace rwde

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sle {

inline constexpr const char* kVersion = "sle-kappa 1.0.0";

// Numerical-domain failures (bad parameter ranges, points outside the closed
// upper half-plane, flows hitting a singularity).  The CLI maps these to exit
// code 3.
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A forward flow reached the driving singularity before the requested time.
class swallowed_error : public domain_error {
public:
    explicit swallowed_error(const std::string& what) : domain_error(what) {}
};

// File problems: unreadable, unwritable, malformed or truncated content,
// format version mismatch.  CLI exit code 4.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Static chunked parallel map over [0, n).  Each index writes only its own
// slot, so results are independent of the thread count; callers reduce
// sequentially afterwards.  threads == 0 picks the hardware count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Ordinary least squares y = slope*x + intercept, plus r^2 and the maximum
// absolute residual.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double max_residual = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// 17 significant digits, enough for doubles to round-trip through text.
std::string fmt17(double v);

}  // namespace sle

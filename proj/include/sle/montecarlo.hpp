#pragma once

// Monte Carlo scans of the corner derivative F'(t, y, kappa), the modulus of
// the reverse-flow derivative at W_t + iy.  Sample i draws its Brownian path
// from the sub-seed split_seed(seed, i), so results are independent of the
// thread count and of evaluation order.

#include <cstdint>
#include <string>
#include <vector>

#include "sle/common.hpp"
#include "sle/driving.hpp"
#include "sle/whitney.hpp"

namespace sle {

// |F'| at the corner point, from the chain scaled to p.kappa.
double derivative_at_corner(const BrownianSample& sample, const CornerPoint& p);

struct ScanRow {
    std::int64_t j;
    double t;
    double mean_pow;       // empirical E |F'|^lambda at t = j 4^-n, y = 2^-n
    double stderr_pow;
    std::int64_t tail_count;  // samples with |F'| >= 2^(n beta)
    double tail_freq;
    double tail_ci_lo;     // Wilson 95% interval
    double tail_ci_hi;
    double envelope_markov;   // 2^(-n lambda beta) j^(-zeta/2)
    double envelope_display;  // 2^(+n lambda beta) j^(-zeta/2)
    double markov_rhs;        // mean_pow / 2^(n lambda beta), >= tail_freq samplewise
};

struct DerivativeScan {
    double kappa = 0.0;
    double beta = 0.0;
    int n = 0;
    int level = 0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double zeta = 0.0;
    double threshold = 0.0;  // 2^(n beta)
    std::vector<ScanRow> rows;
    LinearFit fit;           // log2 mean_pow against log2 j
    double target_slope = 0.0;  // -zeta/2

    std::string moment_json() const;
    std::string tail_json() const;
};

// Moment and tail statistics on shared samples.  j_list values must lie in
// [1, 4^n] and span at least 1.5 decades; level 0 selects 2n + 4.  raw, when
// given, receives |F'| per (j, sample).
DerivativeScan derivative_scan(double kappa, double beta, int n,
                               const std::vector<std::int64_t>& j_list, std::int64_t samples,
                               std::uint64_t seed, int level = 0, unsigned threads = 1,
                               std::vector<std::vector<double>>* raw = nullptr);

struct ContinuityRow {
    double dkappa;
    double epsilon;     // sup driving distance to the base
    double distance;    // sup trace distance to the base
    double basic;       // basic_bound(epsilon, T, y0)
    double tip;         // 2 y0 max|F'| over both traces
    bool within_bound;  // distance <= basic + tip
};

struct ContinuityScan {
    std::uint64_t seed = 0;
    double kappa_base = 0.0;
    double y0 = 0.0;
    int level = 0;
    int t_count = 0;
    std::vector<ContinuityRow> rows;  // dkappa descending
    double eta_hat = 0.0;       // slope of log distance against log dkappa
    double eta_fit_r2 = 0.0;
    double alpha_hat = 0.0;     // lag modulus slope within the base trace
    double alpha_fit_r2 = 0.0;
    double eta_lower_theory = 0.0;  // NaN beyond kappa0
    double quantum = 0.0;           // max tip term, the trace resolution scale
    bool monotone_ok = false;       // distances weakly decreasing up to quantum

    std::string to_json() const;
};

// Traces kappa_base and kappa_base + dkappa on a shared Brownian sample over
// a uniform t grid, with tip cutoff y0.  Requires y0^2 >= 2^-level so the
// cutoff is resolved.
ContinuityScan continuity_scan(std::uint64_t seed, double kappa_base,
                               const std::vector<double>& dkappas, int t_count, double y0,
                               int level, unsigned threads = 1);

}  // namespace sle

#pragma once

// Whitney decomposition of (t, y, kappa) space.  At level n the cells are
//     S_{n;j,l} = [(j-1) 4^-n, j 4^-n] x [2^-n, 2^-n+1] x [(l-1) 2^-nq, l 2^-nq]
// with j in 1..4^n and l in 1..ceil(kappa_max 2^nq); the distinguished corner
// is p = (j 4^-n, 2^-n, l 2^-nq).  F(t, y, kappa) denotes the reverse-flow
// image of W_t + iy under the sqrt(kappa)-scaled driving.

#include <cstdint>
#include <optional>
#include <vector>

#include "sle/driving.hpp"

namespace sle {

struct CornerPoint {
    double t;
    double y;
    double kappa;
};

struct WhitneyBox {
    int n = 0;
    std::int64_t j = 1;
    std::int64_t ell = 1;
    double q = 1.0;

    double t_lo() const;
    double t_hi() const;
    double y_lo() const;
    double y_hi() const;
    double kappa_lo() const;
    double kappa_hi() const;
    CornerPoint corner() const;
};

// Index depth is capped so j and l stay inside 64-bit range.
void check_box_level(int n, double q);

std::int64_t kappa_cells(int n, double q, double kappa_max);
std::int64_t box_count(int n, double q, double kappa_max);

// Lexicographic enumeration: index = (j - 1) * kappa_cells + (ell - 1).
WhitneyBox box_at(int n, double q, double kappa_max, std::int64_t index);

// Cell owning (t, kappa); right-closed in both coordinates, so boundary
// values belong to the cell they end.
WhitneyBox box_containing(int n, double q, double t, double kappa);

// Closed parameter cuboids intersect (shared faces count; levels may differ).
bool boxes_adjacent(const WhitneyBox& a, const WhitneyBox& b);

// Lower bound for diam F(box) from an m x m x m sub-grid (m >= 2).  The
// sample must resolve the box's time scale: sample.level >= 2n.  kappa_fixed
// collapses the kappa axis to a single value.
double box_image_diameter(const BrownianSample& sample, const WhitneyBox& box, int m = 5,
                          std::optional<double> kappa_fixed = std::nullopt);

struct LevelMax {
    int n;
    double max_diameter;
};

// Least-squares decay rate of log2(max diameter) against n, sign-flipped so
// delta_hat > 0 means shrinking boxes.  theoretical_delta evaluates
// min(q - phi(beta'), 1 - beta') at beta' = beta_prime(kappa_hi) when that is
// defined, NaN otherwise.
struct DecayFit {
    double delta_hat;
    double intercept;
    double residual;
    double theoretical_delta;
    std::vector<LevelMax> levels;
};

struct BoxStat {
    WhitneyBox box;
    double diameter;
};

// Samples boxes_per_level boxes uniformly per level (deterministic in
// pick_seed) plus the j = 1 and j = 4^n corner boxes, over kappa cells
// meeting [kappa_lo, kappa_hi].  kappa_lo == kappa_hi collapses the kappa
// axis.  box_stats, when given, receives every sampled box and its diameter.
DecayFit decay_fit(const BrownianSample& sample, double q, double kappa_lo, double kappa_hi,
                   int n_lo, int n_hi, int boxes_per_level, std::uint64_t pick_seed,
                   int m = 5, unsigned threads = 1, std::vector<BoxStat>* box_stats = nullptr);

// Box chain between boundary points (t1, kappa1) and (t2, kappa2): two legs
// descending from the stopping level N to level 2N, joined by an axis walk at
// level N.  N is the smallest level with 4^-N <= |t1-t2| (t rule) or
// 2^-qN <= |kappa1-kappa2| (kappa rule), whichever binds first.  Consecutive
// boxes are adjacent or identical; the count is O(N).
std::vector<WhitneyBox> geodesic_chain(double t1, double kappa1, double t2, double kappa2,
                                       double q);

}  // namespace sle

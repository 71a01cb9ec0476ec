#pragma once

// Driving-perturbation bounds.  With two chains whose drivers stay within
// eps of each other on [0, T] and I = sqrt(4t + y^2):
//     basic:    |f1_t(z) - f2_t(z)| <= eps * (I/y - 1)
//     refined:  eps * exp{ 1/2 sqrt(log(I d1/y) log(I d2/y)) + log log(I/y) }
//     power:    eps * y^{-sqrt((1+beta1)/2)} * log(I/y)   for y in (0, 1]
// The inequalities are exact for piecewise-constant drivers, so the grid
// tolerance only absorbs rounding and the eps-on-grid convention.

#include <string>
#include <vector>

#include "sle/loewner.hpp"

namespace sle {

double basic_bound(double epsilon, double t, double y);

struct RefinedBound {
    double value;
    int clamps;  // inner logarithms pinned at 0
};
// Requires I/y > 1 (t > 0) and positive derivative moduli d1, d2.
RefinedBound refined_bound(double epsilon, double t, double y, double d1, double d2);

// Reported with the overall constant fixed to 1; c1 is the caller's asserted
// envelope constant |f1'| <= c1 * y^-beta1 and participates only in
// validation.  Never a pass/fail quantity, ratios only.
double derivative_power_bound(double epsilon, double t, double y, double beta1, double c1);

struct BoundPoint {
    double t;
    cplx z;
    double observed;
    double bound;
    double ratio;
    double refined;
    double refined_ratio;
};

struct BoundReport {
    double epsilon = 0.0;
    double tol_disc = 0.0;
    double max_ratio = 0.0;
    double worst_t = 0.0;
    cplx worst_z;
    long clamp_count = 0;
    std::vector<double> t_grid;
    std::vector<cplx> z_grid;
    std::vector<BoundPoint> points;

    std::string to_json() const;
};

// Evaluates both flows over t_grid x z_grid and checks the basic bound
// pointwise; eps is the sup distance of the chains' step drivers.  The chains
// must share their step layout.  tol_disc = 10 * dt_max / y_min^2 + 1e-9.
BoundReport verify_pair(const LoewnerChain& chain1, const LoewnerChain& chain2,
                        const std::vector<double>& t_grid, const std::vector<cplx>& z_grid,
                        unsigned threads = 1);

// Empirical constants of the s <= y^2 time-distortion control, probed at
// z = W_t + iy with s = y^2:
//     c_ratio bounds |f'_{t+s}(z)| / |f'_t(z)| and its reciprocal,
//     c_move bounds |f_{t+s}(z) - f_t(z)| / (y |f'_t(z)|).
struct TimeDistortion {
    double c_ratio;
    double c_move;
};
TimeDistortion time_distortion_check(const LoewnerChain& chain, const std::vector<double>& t_grid,
                                     const std::vector<double>& y_grid);

}  // namespace sle

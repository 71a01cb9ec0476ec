#pragma once

// Chordal Loewner evolution under piecewise-constant driving.  Each constant
// step has the closed-form vertical-slit solution
//     reverse:  h = w + sqrt((z - w)^2 - 4 dt)   (opens a slit, maps H into H)
//     forward:  g = w + sqrt((z - w)^2 + 4 dt)   (zips a slit, maps H \ slit onto H)
// with the sqrt branch taking values in the closed upper half-plane.  The
// reverse flow applies step maps in reversed driving order, which reproduces
// the hydrodynamically normalized map f_t at the final time; the forward flow
// applies them in driving order and inverts it.

#include <complex>
#include <cstddef>
#include <vector>

#include "sle/common.hpp"

namespace sle {

using cplx = std::complex<double>;

// Point of the closed upper half-plane.  Imaginary parts in [-1e-12, 0) are
// rounding debris from exact-zero boundary values and clamp to 0; anything
// below that range is rejected.
struct HalfPlanePoint {
    double re = 0.0;
    double im = 0.0;

    HalfPlanePoint() = default;
    HalfPlanePoint(double re_, double im_);
    explicit HalfPlanePoint(cplx z) : HalfPlanePoint(z.real(), z.imag()) {}
    cplx c() const { return {re, im}; }
};

inline constexpr double kImClamp = 1e-12;

// One constant-driving segment: evolve for dt with driving value w.
struct LoewnerStep {
    double dt;
    double w;
};

// A chain of constant-driving steps covering [0, total_time].
class LoewnerChain {
public:
    LoewnerChain(std::vector<double> dt, std::vector<double> w);

    std::size_t size() const { return dt_.size(); }
    double total_time() const { return total_; }
    double dt(std::size_t k) const { return dt_[k]; }
    double w(std::size_t k) const { return w_[k]; }
    // Start time of step k; start_time(size()) == total_time.
    double start_time(std::size_t k) const { return cum_[k]; }
    double dt_max() const { return dt_max_; }

    // Driving value at time t: left grid value held on [t_k, t_{k+1}), the
    // final grid time owning the last step's value.
    double driving_at(double t) const;

    // Index of the step containing t, with boundary times belonging to the
    // step they start.
    std::size_t step_index(double t) const;

private:
    std::vector<double> dt_;
    std::vector<double> w_;
    std::vector<double> cum_;
    double total_ = 0.0;
    double dt_max_ = 0.0;
};

// Single slit-map applications.  dt == 0 is the identity.
HalfPlanePoint elementary_reverse_step(HalfPlanePoint z, double dt, double w);
cplx elementary_reverse_derivative(HalfPlanePoint z, double dt, double w);

// f_t(z): reverse flow over [0, t] of the chain's driving consumed in
// reversed order.  0 <= t <= total_time; partial steps split exactly.
HalfPlanePoint reverse_flow(const LoewnerChain& chain, double t, HalfPlanePoint z);
cplx reverse_flow_derivative(const LoewnerChain& chain, double t, HalfPlanePoint z);

// Point and derivative from one pass over the steps.
struct FlowValue {
    HalfPlanePoint point;
    cplx derivative;
};
FlowValue reverse_flow_with_derivative(const LoewnerChain& chain, double t, HalfPlanePoint z);

// g_t(z) = f_t^{-1}(z): forward flow in driving order.  Throws
// swallowed_error if the flow hits the driving singularity before time t.
HalfPlanePoint forward_flow(const LoewnerChain& chain, double t, HalfPlanePoint z);

struct TraceSample {
    double t;
    HalfPlanePoint point;
};

// Tip approximations gamma(t) ~ f_t(W_t + i y0).
struct Trace {
    std::vector<TraceSample> samples;
    double y0 = 0.0;
};

// times must be sorted, nonnegative and within the chain horizon.
Trace trace(const LoewnerChain& chain, const std::vector<double>& times, double y0);

}  // namespace sle

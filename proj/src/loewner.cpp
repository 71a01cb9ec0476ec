#include "sle/loewner.hpp"

#include <algorithm>
#include <cmath>

namespace sle {

namespace {

// sqrt branch with values in the closed upper half-plane.  For real
// nonnegative arguments (boundary points) the sign follows the continuation
// from Im > 0, which is the sign of Re(z - w).
cplx upper_sqrt(cplx zeta, double sign_hint) {
    cplx s = std::sqrt(zeta);
    if (s.imag() < 0.0) {
        s = -s;
    } else if (s.imag() == 0.0 && sign_hint < 0.0) {
        s = -s;
    }
    return s;
}

cplx reverse_step_c(cplx z, double dt, double w) {
    const cplx dz = z - w;
    return w + upper_sqrt(dz * dz - 4.0 * dt, dz.real());
}

cplx forward_step_c(cplx z, double dt, double w) {
    const cplx dz = z - w;
    const double scale = std::max({1.0, std::abs(w), 2.0 * std::sqrt(dt)});
    if (std::abs(dz) <= 1e-14 * scale)
        throw swallowed_error("forward_flow: point reached the driving singularity");
    return w + upper_sqrt(dz * dz + 4.0 * dt, dz.real());
}

}  // namespace

HalfPlanePoint::HalfPlanePoint(double re_, double im_) : re(re_), im(im_) {
    if (im < 0.0) {
        if (im < -kImClamp)
            throw domain_error("HalfPlanePoint: im = " + fmt17(im) + " below the half-plane");
        im = 0.0;
    }
}

LoewnerChain::LoewnerChain(std::vector<double> dt, std::vector<double> w)
    : dt_(std::move(dt)), w_(std::move(w)) {
    if (dt_.empty() || dt_.size() != w_.size())
        throw domain_error("LoewnerChain: need matching nonempty dt and w lists");
    cum_.resize(dt_.size() + 1);
    cum_[0] = 0.0;
    for (std::size_t k = 0; k < dt_.size(); ++k) {
        if (!(dt_[k] > 0.0)) throw domain_error("LoewnerChain: step durations must be positive");
        cum_[k + 1] = cum_[k] + dt_[k];
        dt_max_ = std::max(dt_max_, dt_[k]);
    }
    total_ = cum_.back();
}

std::size_t LoewnerChain::step_index(double t) const {
    // First k with cum_[k+1] > t, capped at the last step.
    const auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - (cum_.begin() + 1));
    return std::min(k, dt_.size() - 1);
}

double LoewnerChain::driving_at(double t) const {
    if (t < 0.0 || t > total_ * (1.0 + 1e-12))
        throw domain_error("driving_at: time outside [0, total_time]");
    if (t >= total_) return w_.back();
    return w_[step_index(t)];
}

HalfPlanePoint elementary_reverse_step(HalfPlanePoint z, double dt, double w) {
    if (dt < 0.0) throw domain_error("elementary_reverse_step: negative dt");
    if (dt == 0.0) return z;
    return HalfPlanePoint(reverse_step_c(z.c(), dt, w));
}

cplx elementary_reverse_derivative(HalfPlanePoint z, double dt, double w) {
    if (dt < 0.0) throw domain_error("elementary_reverse_derivative: negative dt");
    if (dt == 0.0) return {1.0, 0.0};
    const cplx dz = z.c() - w;
    const cplx s = upper_sqrt(dz * dz - 4.0 * dt, dz.real());
    if (s == cplx(0.0, 0.0))
        throw domain_error("elementary_reverse_derivative: singular at the slit base");
    return dz / s;
}

namespace {

// Shared driver for the reverse flow: visits the steps covering [0, t] in
// reversed order, handing (z_before, dt, w) to the visitor which returns the
// advanced point.
template <typename Visit>
cplx reverse_walk(const LoewnerChain& chain, double t, cplx z, Visit&& visit) {
    if (t < 0.0 || t > chain.total_time() * (1.0 + 1e-12))
        throw domain_error("reverse_flow: time outside [0, total_time]");
    t = std::min(t, chain.total_time());
    if (t == 0.0) return z;
    const std::size_t k = chain.step_index(t);
    const double part = t - chain.start_time(k);
    if (part > 0.0) z = visit(z, part, chain.w(k));
    for (std::size_t j = k; j-- > 0;) z = visit(z, chain.dt(j), chain.w(j));
    return z;
}

}  // namespace

HalfPlanePoint reverse_flow(const LoewnerChain& chain, double t, HalfPlanePoint z) {
    const cplx out = reverse_walk(chain, t, z.c(), [](cplx h, double dt, double w) {
        return reverse_step_c(h, dt, w);
    });
    return HalfPlanePoint(out);
}

cplx reverse_flow_derivative(const LoewnerChain& chain, double t, HalfPlanePoint z) {
    return reverse_flow_with_derivative(chain, t, z).derivative;
}

FlowValue reverse_flow_with_derivative(const LoewnerChain& chain, double t, HalfPlanePoint z) {
    cplx deriv(1.0, 0.0);
    const cplx out = reverse_walk(chain, t, z.c(), [&deriv](cplx h, double dt, double w) {
        const cplx dz = h - w;
        const cplx s = upper_sqrt(dz * dz - 4.0 * dt, dz.real());
        if (s == cplx(0.0, 0.0))
            throw domain_error("reverse_flow_derivative: singular at the slit base");
        deriv *= dz / s;
        return w + s;
    });
    return {HalfPlanePoint(out), deriv};
}

HalfPlanePoint forward_flow(const LoewnerChain& chain, double t, HalfPlanePoint z) {
    if (t < 0.0 || t > chain.total_time() * (1.0 + 1e-12))
        throw domain_error("forward_flow: time outside [0, total_time]");
    t = std::min(t, chain.total_time());
    cplx g = z.c();
    if (t == 0.0) return HalfPlanePoint(g);
    const std::size_t k = chain.step_index(t);
    for (std::size_t j = 0; j < k; ++j) g = forward_step_c(g, chain.dt(j), chain.w(j));
    const double part = t - chain.start_time(k);
    if (part > 0.0) g = forward_step_c(g, part, chain.w(k));
    return HalfPlanePoint(g);
}

Trace trace(const LoewnerChain& chain, const std::vector<double>& times, double y0) {
    if (!(y0 > 0.0)) throw domain_error("trace: y0 must be positive");
    Trace tr;
    tr.y0 = y0;
    tr.samples.reserve(times.size());
    double prev = -1.0;
    for (double t : times) {
        if (t < prev) throw domain_error("trace: times must be sorted");
        prev = t;
        const HalfPlanePoint z(chain.driving_at(t), y0);
        tr.samples.push_back({t, reverse_flow(chain, t, z)});
    }
    return tr;
}

}  // namespace sle

#include "sle/perturbation.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

namespace sle {

namespace {

double interval_radius(double t, double y) {
    return std::sqrt(4.0 * t + y * y);
}

void require_grid_point(double t, double y, const char* who) {
    if (!(y > 0.0)) throw domain_error(std::string(who) + ": y must be positive");
    if (t < 0.0) throw domain_error(std::string(who) + ": t must be nonnegative");
}

}  // namespace

double basic_bound(double epsilon, double t, double y) {
    if (epsilon < 0.0) throw domain_error("basic_bound: epsilon must be nonnegative");
    require_grid_point(t, y, "basic_bound");
    return epsilon * (interval_radius(t, y) / y - 1.0);
}

RefinedBound refined_bound(double epsilon, double t, double y, double d1, double d2) {
    if (epsilon < 0.0) throw domain_error("refined_bound: epsilon must be nonnegative");
    require_grid_point(t, y, "refined_bound");
    if (!(d1 > 0.0) || !(d2 > 0.0))
        throw domain_error("refined_bound: derivative moduli must be positive");
    const double ratio = interval_radius(t, y) / y;
    if (ratio <= 1.0) throw domain_error("refined_bound: I/y <= 1, outer log log undefined");
    RefinedBound out{0.0, 0};
    double l1 = std::log(ratio * d1);
    double l2 = std::log(ratio * d2);
    if (l1 < 0.0) {
        l1 = 0.0;
        ++out.clamps;
    }
    if (l2 < 0.0) {
        l2 = 0.0;
        ++out.clamps;
    }
    out.value = epsilon * std::exp(0.5 * std::sqrt(l1 * l2) + std::log(std::log(ratio)));
    return out;
}

double derivative_power_bound(double epsilon, double t, double y, double beta1, double c1) {
    if (epsilon < 0.0) throw domain_error("derivative_power_bound: epsilon must be nonnegative");
    if (!(y > 0.0) || y > 1.0) throw domain_error("derivative_power_bound: y must lie in (0, 1]");
    if (!(t > 0.0)) throw domain_error("derivative_power_bound: t must be positive");
    if (!(beta1 >= -1.0)) throw domain_error("derivative_power_bound: beta1 must be >= -1");
    if (!(c1 > 0.0)) throw domain_error("derivative_power_bound: c1 must be positive");
    const double ratio = interval_radius(t, y) / y;
    return epsilon * std::pow(y, -std::sqrt((1.0 + beta1) / 2.0)) * std::log(ratio);
}

BoundReport verify_pair(const LoewnerChain& chain1, const LoewnerChain& chain2,
                        const std::vector<double>& t_grid, const std::vector<cplx>& z_grid,
                        unsigned threads) {
    if (chain1.size() != chain2.size() ||
        chain1.total_time() != chain2.total_time())
        throw domain_error("verify_pair: chains must share their step layout");
    for (std::size_t k = 0; k < chain1.size(); ++k)
        if (chain1.dt(k) != chain2.dt(k))
            throw domain_error("verify_pair: chains must share their step layout");
    if (t_grid.empty() || z_grid.empty())
        throw domain_error("verify_pair: empty evaluation grid");

    BoundReport rep;
    rep.t_grid = t_grid;
    rep.z_grid = z_grid;

    double eps = 0.0;
    for (std::size_t k = 0; k < chain1.size(); ++k)
        eps = std::max(eps, std::abs(chain1.w(k) - chain2.w(k)));
    rep.epsilon = eps;

    double y_min = std::numeric_limits<double>::infinity();
    for (const cplx& z : z_grid) {
        if (!(z.imag() > 0.0)) throw domain_error("verify_pair: grid points need im > 0");
        y_min = std::min(y_min, z.imag());
    }
    rep.tol_disc = 10.0 * chain1.dt_max() / (y_min * y_min) + 1e-9;

    for (double t : t_grid)
        if (t < 0.0 || t > chain1.total_time() * (1.0 + 1e-12))
            throw domain_error("verify_pair: t outside the chain horizon");

    rep.points.resize(t_grid.size() * z_grid.size());
    std::vector<int> clamp_slots(rep.points.size(), 0);
    parallel_for(rep.points.size(), threads, [&](std::size_t idx) {
        const double t = t_grid[idx / z_grid.size()];
        const cplx z = z_grid[idx % z_grid.size()];
        const HalfPlanePoint p(z);
        BoundPoint bp{};
        bp.t = t;
        bp.z = z;
        const cplx f1 = reverse_flow(chain1, t, p).c();
        const cplx f2 = reverse_flow(chain2, t, p).c();
        bp.observed = std::abs(f1 - f2);
        bp.bound = basic_bound(eps, t, z.imag());
        if (bp.bound > 0.0) {
            bp.ratio = bp.observed / bp.bound;
        } else {
            bp.ratio = bp.observed > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        }
        if (t > 0.0 && eps > 0.0) {
            const double d1 = std::abs(reverse_flow_derivative(chain1, t, p));
            const double d2 = std::abs(reverse_flow_derivative(chain2, t, p));
            const RefinedBound rb = refined_bound(eps, t, z.imag(), d1, d2);
            bp.refined = rb.value;
            bp.refined_ratio = rb.value > 0.0 ? bp.observed / rb.value : 0.0;
            clamp_slots[idx] = rb.clamps;
        }
        rep.points[idx] = bp;
    });

    rep.max_ratio = 0.0;
    rep.worst_t = rep.points.front().t;
    rep.worst_z = rep.points.front().z;
    for (const BoundPoint& bp : rep.points) {
        if (bp.ratio > rep.max_ratio) {
            rep.max_ratio = bp.ratio;
            rep.worst_t = bp.t;
            rep.worst_z = bp.z;
        }
    }
    rep.clamp_count = 0;
    for (int c : clamp_slots) rep.clamp_count += c;
    return rep;
}

std::string BoundReport::to_json() const {
    nlohmann::ordered_json j;
    j["epsilon"] = epsilon;
    nlohmann::ordered_json grid;
    grid["t"] = t_grid;
    auto zs = nlohmann::ordered_json::array();
    for (const cplx& z : z_grid) zs.push_back({z.real(), z.imag()});
    grid["z"] = zs;
    j["grid"] = grid;
    j["max_ratio"] = max_ratio;
    j["worst_point"] = {{"t", worst_t}, {"re", worst_z.real()}, {"im", worst_z.imag()}};
    j["clamp_count"] = clamp_count;
    j["tol_disc"] = tol_disc;
    return j.dump(2);
}

TimeDistortion time_distortion_check(const LoewnerChain& chain, const std::vector<double>& t_grid,
                                     const std::vector<double>& y_grid) {
    if (t_grid.empty() || y_grid.empty())
        throw domain_error("time_distortion_check: empty grid");
    TimeDistortion out{0.0, 0.0};
    for (double t : t_grid) {
        for (double y : y_grid) {
            if (!(y > 0.0)) throw domain_error("time_distortion_check: y must be positive");
            const double s = y * y;
            if (t < 0.0 || t + s > chain.total_time() * (1.0 + 1e-12))
                throw domain_error("time_distortion_check: t + y^2 exceeds the chain horizon");
            const HalfPlanePoint z(chain.driving_at(t), y);
            const double d1 = std::abs(reverse_flow_derivative(chain, t, z));
            const double d2 = std::abs(reverse_flow_derivative(chain, t + s, z));
            if (!(d1 > 0.0) || !(d2 > 0.0))
                throw domain_error("time_distortion_check: vanishing derivative");
            const double r = d2 / d1;
            out.c_ratio = std::max({out.c_ratio, r, 1.0 / r});
            const cplx f1 = reverse_flow(chain, t, z).c();
            const cplx f2 = reverse_flow(chain, t + s, z).c();
            out.c_move = std::max(out.c_move, std::abs(f2 - f1) / (y * d1));
        }
    }
    return out;
}

}  // namespace sle

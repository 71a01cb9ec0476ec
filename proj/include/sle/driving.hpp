#pragma once

// Deterministic driving terms.  Brownian paths on [0, 1] come from Levy
// midpoint refinement with one Gaussian per dyadic node, drawn from a
// counter-based generator keyed by (seed, node id).  Refining a sample never
// perturbs coarser levels, and regeneration is bit-exact for equal keys.

#include <cstdint>
#include <string>
#include <vector>

#include "sle/common.hpp"
#include "sle/loewner.hpp"

namespace sle {

namespace rng {

// splitmix64-style finalizer; stateless keyed stream u64 -> u64.
std::uint64_t keyed_u64(std::uint64_t seed, std::uint64_t counter);
// In the open interval (0, 1).
double uniform01(std::uint64_t seed, std::uint64_t counter);
// Standard normal via Box-Muller; one draw per counter.
double gaussian(std::uint64_t seed, std::uint64_t counter);
// Independent sub-seed for stream splitting.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace rng

inline constexpr int kMaxBrownianLevel = 30;

// B(k 2^-level) for k = 0..2^level on [0, 1]; values[0] == 0.
struct BrownianSample {
    std::uint64_t seed = 0;
    int level = 0;
    std::vector<double> values;
};

BrownianSample brownian_sample(std::uint64_t seed, int level);

enum class Interp { piecewise_constant_left, linear };

const char* interp_tag(Interp interp);
Interp interp_from_tag(const std::string& tag);

// Uniform time grid on [0, t_max] with an interpolation rule.
struct DrivingTerm {
    double t_max = 1.0;
    std::vector<double> values;
    Interp interp = Interp::piecewise_constant_left;

    std::size_t points() const { return values.size(); }
    double grid_dt() const { return t_max / static_cast<double>(values.size() - 1); }
    double value_at(double t) const;
};

// W = sqrt(kappa) * B on the sample's grid.
DrivingTerm scale_to_driving(const BrownianSample& sample, double kappa);

enum class DriverKind { zero, constant, linear, sqrt };

// zero: 0, constant: c, linear: c*t, sqrt: c*sqrt(t).
DrivingTerm deterministic_driver(DriverKind kind, double c, double t_max, std::size_t points);

// Max |a - b| over the shared grid; grids must agree exactly.
double sup_distance(const DrivingTerm& a, const DrivingTerm& b);

// Chain of constant-driving steps holding each left grid value.
LoewnerChain make_chain(const DrivingTerm& term);

void save_driving(const DrivingTerm& term, const std::string& path);
DrivingTerm load_driving(const std::string& path);
void save_brownian(const BrownianSample& sample, const std::string& path);
BrownianSample load_brownian(const std::string& path);

}  // namespace sle

#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <string>

#include "sle/driving.hpp"
#include "sle/loewner.hpp"

namespace testutil {

// Reference branch: sqrt with values in the closed upper half-plane.  Only
// safe away from the negative-real boundary ambiguity, so callers stick to
// interior points.
inline sle::cplx upper_sqrt_ref(sle::cplx zeta) {
    sle::cplx r = std::sqrt(zeta);
    if (r.imag() < 0.0) r = -r;
    return r;
}

inline sle::LoewnerChain zero_chain(std::size_t steps, double t_max) {
    return sle::make_chain(
        sle::deterministic_driver(sle::DriverKind::zero, 0.0, t_max, steps + 1));
}

inline sle::LoewnerChain brownian_chain(std::uint64_t seed, int level, double kappa) {
    return sle::make_chain(sle::scale_to_driving(sle::brownian_sample(seed, level), kappa));
}

inline std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace testutil

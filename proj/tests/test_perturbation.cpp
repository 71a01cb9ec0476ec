#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "sle/driving.hpp"
#include "sle/perturbation.hpp"

using namespace sle;
using testutil::upper_sqrt_ref;

TEST_CASE("basic bound closed form") {
    // eps=0.1, t=1, y=1: 0.1 (sqrt5 - 1).
    CHECK(basic_bound(0.1, 1.0, 1.0) ==
          doctest::Approx(0.1 * (std::sqrt(5.0) - 1.0)).epsilon(1e-12));
    CHECK(basic_bound(0.0, 1.0, 1.0) == 0.0);
    CHECK(basic_bound(1.0, 0.0, 2.0) == 0.0);
    // Decreasing in y, increasing in t.
    CHECK(basic_bound(1.0, 1.0, 0.5) > basic_bound(1.0, 1.0, 1.0));
    CHECK(basic_bound(1.0, 2.0, 1.0) > basic_bound(1.0, 1.0, 1.0));
    CHECK_THROWS_AS(basic_bound(-0.1, 1.0, 1.0), domain_error);
    CHECK_THROWS_AS(basic_bound(0.1, 1.0, 0.0), domain_error);
    CHECK_THROWS_AS(basic_bound(0.1, -1.0, 1.0), domain_error);
}

TEST_CASE("refined bound worked value and clamps") {
    // eps=1, t=6, y=1, d1=d2=1: I=5, exp(log5/2 + log log 5) = 3.5988125782.
    auto rb = refined_bound(1.0, 6.0, 1.0, 1.0, 1.0);
    CHECK(rb.value == doctest::Approx(3.5988125782445416).epsilon(1e-9));
    CHECK(rb.clamps == 0);

    // Small derivatives push the inner logs negative; both clamp to zero and
    // the bound collapses to eps * log log term.
    auto low = refined_bound(1.0, 6.0, 1.0, 0.1, 0.1);
    CHECK(low.clamps == 2);
    CHECK(low.value == doctest::Approx(std::log(5.0)).epsilon(1e-12));
    auto one = refined_bound(1.0, 6.0, 1.0, 0.1, 1.0);
    CHECK(one.clamps == 1);
    CHECK(one.value == doctest::Approx(std::log(5.0)).epsilon(1e-12));

    // Monotone in the derivative arguments.
    CHECK(refined_bound(1.0, 6.0, 1.0, 2.0, 2.0).value >= rb.value);

    // Scales linearly in eps.
    CHECK(refined_bound(0.25, 6.0, 1.0, 1.0, 1.0).value ==
          doctest::Approx(0.25 * rb.value).epsilon(1e-12));

    CHECK_THROWS_AS(refined_bound(1.0, 0.0, 1.0, 1.0, 1.0), domain_error);
    CHECK_THROWS_AS(refined_bound(1.0, 6.0, 1.0, 0.0, 1.0), domain_error);
    CHECK_THROWS_AS(refined_bound(-1.0, 6.0, 1.0, 1.0, 1.0), domain_error);
}

TEST_CASE("derivative power bound shape") {
    // beta1 = 1 gives the full 1/y power, beta1 = -1 none.
    const double t = 1.0, y = 0.25;
    const double lg = std::log(std::sqrt(4.0 * t + y * y) / y);
    CHECK(derivative_power_bound(1.0, t, y, 1.0, 1.0) ==
          doctest::Approx(lg / y).epsilon(1e-12));
    CHECK(derivative_power_bound(1.0, t, y, -1.0, 1.0) ==
          doctest::Approx(lg).epsilon(1e-12));
    CHECK(derivative_power_bound(1.0, t, y, 0.0, 1.0) ==
          doctest::Approx(std::pow(y, -std::sqrt(0.5)) * lg).epsilon(1e-12));
    // Linear in eps; c1 only participates in validation.
    CHECK(derivative_power_bound(2.0, t, y, 0.5, 1.0) ==
          doctest::Approx(2.0 * derivative_power_bound(1.0, t, y, 0.5, 7.0)).epsilon(1e-12));
    CHECK_THROWS_AS(derivative_power_bound(1.0, t, 1.5, 0.5, 1.0), domain_error);
    CHECK_THROWS_AS(derivative_power_bound(1.0, 0.0, y, 0.5, 1.0), domain_error);
    CHECK_THROWS_AS(derivative_power_bound(1.0, t, y, -1.5, 1.0), domain_error);
    CHECK_THROWS_AS(derivative_power_bound(1.0, t, y, 0.5, 0.0), domain_error);
}

TEST_CASE("identical chains verify to zero") {
    auto ch = testutil::brownian_chain(4, 10, 1.0);
    std::vector<double> ts{0.25, 0.5, 1.0};
    std::vector<cplx> zs{{0.0, 0.5}, {0.3, 0.25}};
    auto rep = verify_pair(ch, ch, ts, zs);
    CHECK(rep.epsilon == 0.0);
    CHECK(rep.max_ratio == 0.0);
    CHECK(rep.clamp_count == 0);
    for (const auto& p : rep.points) CHECK(p.observed == 0.0);
}

TEST_CASE("constant shift pair matches the closed form") {
    // Drivers 0 and eps: f1 = sqrt(z^2 - 4t), f2 = eps + sqrt((z-eps)^2 - 4t).
    const double eps = 0.05;
    const std::size_t pts = 257;
    auto c1 = make_chain(deterministic_driver(DriverKind::zero, 0.0, 1.0, pts));
    auto c2 = make_chain(deterministic_driver(DriverKind::constant, eps, 1.0, pts));
    std::vector<double> ts{0.1, 0.5, 1.0};
    std::vector<cplx> zs{{0.0, 0.5}, {0.4, 1.0}, {-1.0, 0.25}};
    auto rep = verify_pair(c1, c2, ts, zs);
    CHECK(rep.epsilon == doctest::Approx(eps).epsilon(1e-15));
    CHECK(rep.max_ratio <= 1.0 + rep.tol_disc);

    for (const auto& p : rep.points) {
        const cplx f1 = upper_sqrt_ref(p.z * p.z - 4.0 * p.t);
        const cplx f2 = eps + upper_sqrt_ref((p.z - eps) * (p.z - eps) - 4.0 * p.t);
        CHECK(p.observed == doctest::Approx(std::abs(f1 - f2)).epsilon(1e-10));
        CHECK(p.bound ==
              doctest::Approx(basic_bound(eps, p.t, p.z.imag())).epsilon(1e-12));
    }
}

TEST_CASE("grid tolerance formula") {
    auto c1 = testutil::brownian_chain(5, 8, 1.0);
    auto c2 = testutil::brownian_chain(5, 8, 1.1);
    std::vector<double> ts{0.5, 1.0};
    std::vector<cplx> zs{{0.0, 0.25}, {0.1, 0.0625}};
    auto rep = verify_pair(c1, c2, ts, zs);
    const double expected = 10.0 * std::ldexp(1.0, -8) / (0.0625 * 0.0625) + 1e-9;
    CHECK(rep.tol_disc == doctest::Approx(expected).epsilon(1e-12));
    CHECK(rep.t_grid == ts);
    REQUIRE(rep.z_grid.size() == zs.size());
}

TEST_CASE("brownian pairs respect the basic bound on the grid") {
    std::vector<double> ts;
    for (int i = 1; i <= 10; ++i) ts.push_back(0.1 * i);
    std::vector<cplx> zs;
    for (int i = 1; i <= 5; ++i) zs.push_back(cplx(0.0, std::ldexp(1.0, -i)));

    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto b = brownian_sample(seed, 14);
        auto c1 = make_chain(scale_to_driving(b, 1.0));
        auto c2 = make_chain(scale_to_driving(b, 1.0 + 1.0 / 64));
        auto rep = verify_pair(c1, c2, ts, zs);
        CHECK(rep.epsilon > 0.0);
        CHECK(rep.max_ratio <= 1.0 + rep.tol_disc);

        // The refined bound evaluated with a universal c/y derivative
        // envelope also covers every observation: the true derivative
        // moduli sit below the envelope and the bound is monotone in them.
        const double c_env = 9.0;
        for (const auto& p : rep.points) {
            const double y = p.z.imag();
            const double d1 = std::abs(reverse_flow_derivative(c1, p.t, HalfPlanePoint(p.z)));
            const double d2 = std::abs(reverse_flow_derivative(c2, p.t, HalfPlanePoint(p.z)));
            CHECK(d1 <= c_env / y);
            CHECK(d2 <= c_env / y);
            auto env = refined_bound(rep.epsilon, p.t, y, c_env / y, c_env / y);
            CHECK(p.observed <= env.value * (1.0 + rep.tol_disc));
        }
    }
}

TEST_CASE("verify_pair validates its inputs") {
    auto c1 = testutil::brownian_chain(1, 8, 1.0);
    auto c2 = testutil::brownian_chain(1, 9, 1.0);
    std::vector<double> ts{0.5};
    std::vector<cplx> zs{{0.0, 0.5}};
    CHECK_THROWS_AS(verify_pair(c1, c2, ts, zs), domain_error);

    auto c3 = testutil::brownian_chain(2, 8, 1.0);
    CHECK_THROWS_AS(verify_pair(c1, c3, {2.0}, zs), domain_error);
    CHECK_THROWS_AS(verify_pair(c1, c3, ts, {cplx(0.5, 0.0)}), domain_error);
    CHECK_THROWS_AS(verify_pair(c1, c3, {}, zs), domain_error);
    CHECK_THROWS_AS(verify_pair(c1, c3, ts, {}), domain_error);
}

TEST_CASE("bound report serializes to well-formed json") {
    auto ch = testutil::brownian_chain(4, 8, 1.0);
    auto rep = verify_pair(ch, ch, {0.5, 1.0}, {cplx(0.0, 0.5)});
    auto j = nlohmann::json::parse(rep.to_json());
    CHECK(j["epsilon"].get<double>() == 0.0);
    CHECK(j["max_ratio"].get<double>() == 0.0);
    CHECK(j["grid"]["t"].size() == 2);
    CHECK(j["grid"]["z"].size() == 1);
    CHECK(j.contains("worst_point"));
    CHECK(j.contains("clamp_count"));
    CHECK(j.contains("tol_disc"));
}

TEST_CASE("time distortion constants for zero driving") {
    // s = y^2 moves the image by at most 2 y |f'| and scales the derivative
    // by at most sqrt5; both extremes are approached as y -> 0.
    auto ch = testutil::zero_chain(4096, 1.0);
    std::vector<double> ts{0.0, 0.1, 0.3, 0.5};
    std::vector<double> ys{0.5, 0.25, 0.125, 0.0625};
    auto td = time_distortion_check(ch, ts, ys);
    CHECK(td.c_move <= 2.0 + 1e-9);
    CHECK(td.c_move > 1.5);
    CHECK(td.c_ratio <= std::sqrt(5.0) + 1e-9);
    CHECK(td.c_ratio > 1.0);

    // Closed form at t = 0: move = 4a/(sqrt(a^2+4y^2)+a) with a = y, giving
    // 4/(1+sqrt5); ratio = sqrt5.
    auto td0 = time_distortion_check(ch, {0.0}, {0.25});
    CHECK(td0.c_ratio == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
    CHECK(td0.c_move == doctest::Approx(4.0 / (1.0 + std::sqrt(5.0))).epsilon(1e-9));

    // Horizon violations are rejected: t + y^2 must stay inside.
    CHECK_THROWS_AS(time_distortion_check(ch, {1.0}, {0.25}), domain_error);
}

TEST_CASE("time distortion stays finite on brownian chains") {
    auto ch = testutil::brownian_chain(6, 12, 1.0);
    std::vector<double> ts{0.1, 0.4, 0.7};
    std::vector<double> ys{0.25, 0.125};
    auto td = time_distortion_check(ch, ts, ys);
    CHECK(td.c_ratio >= 1.0);
    CHECK(std::isfinite(td.c_ratio));
    CHECK(td.c_move > 0.0);
    CHECK(std::isfinite(td.c_move));
}

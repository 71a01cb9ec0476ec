#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "sle/driving.hpp"

using namespace sle;

TEST_CASE("keyed generator is deterministic and well spread") {
    CHECK(rng::keyed_u64(1, 0) == rng::keyed_u64(1, 0));
    CHECK(rng::keyed_u64(1, 0) != rng::keyed_u64(1, 1));
    CHECK(rng::keyed_u64(1, 0) != rng::keyed_u64(2, 0));
    CHECK(rng::split_seed(9, 0) != rng::split_seed(9, 1));
    CHECK(rng::split_seed(9, 3) == rng::split_seed(9, 3));

    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng::uniform01(42, static_cast<std::uint64_t>(i));
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("gaussian moments") {
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double g = rng::gaussian(7, static_cast<std::uint64_t>(i));
        sum += g;
        sq += g * g;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) <= 0.03);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("brownian sample structure and endpoint variance") {
    auto b = brownian_sample(1, 8);
    CHECK(b.values.size() == 257);
    CHECK(b.values[0] == 0.0);
    CHECK(b.level == 8);
    CHECK(b.seed == 1);

    // B(1) is standard normal across seeds.
    double sq = 0.0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        const double v = brownian_sample(static_cast<std::uint64_t>(s), 0).values[1];
        sq += v * v;
    }
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));

    CHECK_THROWS_AS(brownian_sample(1, -1), domain_error);
    CHECK_THROWS_AS(brownian_sample(1, kMaxBrownianLevel + 1), domain_error);
}

TEST_CASE("midpoint refinement preserves coarse levels bit-exactly") {
    for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
        auto coarse = brownian_sample(seed, 6);
        auto fine = brownian_sample(seed, 10);
        for (std::size_t k = 0; k < coarse.values.size(); ++k)
            CHECK(coarse.values[k] == fine.values[k * 16]);
    }
}

TEST_CASE("brownian increment variance matches the grid spacing") {
    const int level = 10;
    double sq = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto b = brownian_sample(seed, level);
        for (std::size_t k = 1; k < b.values.size(); ++k) {
            const double d = b.values[k] - b.values[k - 1];
            sq += d * d;
            ++count;
        }
    }
    const double var = sq / static_cast<double>(count);
    CHECK(var == doctest::Approx(std::ldexp(1.0, -level)).epsilon(0.05));
}

TEST_CASE("scaling to driving couples kappa values through one sample") {
    auto b = brownian_sample(5, 10);
    auto w1 = scale_to_driving(b, 1.0);
    auto w2 = scale_to_driving(b, 2.0);
    CHECK(w1.t_max == 1.0);
    CHECK(w1.values.size() == b.values.size());
    for (std::size_t k = 0; k < b.values.size(); ++k)
        CHECK(w1.values[k] == b.values[k]);

    double max_abs = 0.0;
    for (double v : b.values) max_abs = std::max(max_abs, std::abs(v));
    const double coupling = std::abs(std::sqrt(2.0) - 1.0) * max_abs;
    CHECK(sup_distance(w1, w2) == doctest::Approx(coupling).epsilon(1e-12));

    auto w0 = scale_to_driving(b, 0.0);
    for (double v : w0.values) CHECK(v == 0.0);
    CHECK_THROWS_AS(scale_to_driving(b, -0.5), domain_error);
}

TEST_CASE("value_at interpolation conventions") {
    DrivingTerm pc{1.0, {1.0, 3.0, 5.0}, Interp::piecewise_constant_left};
    CHECK(pc.grid_dt() == 0.5);
    CHECK(pc.value_at(0.0) == 1.0);
    CHECK(pc.value_at(0.49) == 1.0);
    CHECK(pc.value_at(0.5) == 3.0);
    CHECK(pc.value_at(0.99) == 3.0);
    CHECK(pc.value_at(1.0) == 5.0);

    DrivingTerm lin{1.0, {1.0, 3.0, 5.0}, Interp::linear};
    CHECK(lin.value_at(0.25) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(lin.value_at(0.75) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(lin.value_at(1.0) == 5.0);
}

TEST_CASE("deterministic drivers") {
    auto z = deterministic_driver(DriverKind::zero, 0.0, 2.0, 5);
    for (double v : z.values) CHECK(v == 0.0);
    CHECK(z.t_max == 2.0);

    auto c = deterministic_driver(DriverKind::constant, 1.5, 1.0, 4);
    for (double v : c.values) CHECK(v == 1.5);

    auto l = deterministic_driver(DriverKind::linear, 2.0, 1.0, 5);
    CHECK(l.values[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(l.values[4] == doctest::Approx(2.0).epsilon(1e-15));

    auto s = deterministic_driver(DriverKind::sqrt, 3.0, 4.0, 5);
    CHECK(s.values[0] == 0.0);
    CHECK(s.values[1] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(s.values[4] == doctest::Approx(6.0).epsilon(1e-15));

    CHECK_THROWS_AS(deterministic_driver(DriverKind::zero, 0.0, 1.0, 1), domain_error);
    CHECK_THROWS_AS(deterministic_driver(DriverKind::zero, 0.0, 0.0, 4), domain_error);
}

TEST_CASE("sup distance is a metric on the shared grid") {
    std::mt19937 gen(13);
    std::normal_distribution<double> nd;
    auto rand_term = [&] {
        DrivingTerm t{1.0, {}, Interp::piecewise_constant_left};
        for (int i = 0; i < 17; ++i) t.values.push_back(nd(gen));
        return t;
    };
    for (int rep = 0; rep < 50; ++rep) {
        auto a = rand_term(), b = rand_term(), c = rand_term();
        CHECK(sup_distance(a, a) == 0.0);
        CHECK(sup_distance(a, b) == sup_distance(b, a));
        CHECK(sup_distance(a, c) <= sup_distance(a, b) + sup_distance(b, c) + 1e-15);
    }

    DrivingTerm short_term{1.0, {0.0, 1.0}, Interp::piecewise_constant_left};
    DrivingTerm long_term{1.0, {0.0, 1.0, 2.0}, Interp::piecewise_constant_left};
    CHECK_THROWS_AS(sup_distance(short_term, long_term), domain_error);
    DrivingTerm other_horizon{2.0, {0.0, 1.0}, Interp::piecewise_constant_left};
    CHECK_THROWS_AS(sup_distance(short_term, other_horizon), domain_error);
}

TEST_CASE("chain construction from a driving term") {
    DrivingTerm term{1.0, {0.5, -0.5, 1.5, 0.0, 2.0}, Interp::piecewise_constant_left};
    auto ch = make_chain(term);
    CHECK(ch.size() == 4);
    CHECK(ch.total_time() == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(ch.dt(k) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(ch.w(k) == term.values[k]);
    }
}

TEST_CASE("driving term save and load round trip") {
    auto b = brownian_sample(21, 8);
    auto w = scale_to_driving(b, 1.7);
    const std::string path = testutil::temp_path("sle_test_driving.txt");
    save_driving(w, path);
    auto back = load_driving(path);
    CHECK(back.t_max == w.t_max);
    CHECK(back.interp == w.interp);
    REQUIRE(back.values.size() == w.values.size());
    for (std::size_t k = 0; k < w.values.size(); ++k) CHECK(back.values[k] == w.values[k]);
    std::remove(path.c_str());
}

TEST_CASE("brownian save and load round trip") {
    auto b = brownian_sample(33, 9);
    const std::string path = testutil::temp_path("sle_test_bsample.txt");
    save_brownian(b, path);
    auto back = load_brownian(path);
    CHECK(back.seed == b.seed);
    CHECK(back.level == b.level);
    REQUIRE(back.values.size() == b.values.size());
    for (std::size_t k = 0; k < b.values.size(); ++k) CHECK(back.values[k] == b.values[k]);
    std::remove(path.c_str());
}

TEST_CASE("loader rejects missing, malformed, truncated and mismatched files") {
    CHECK_THROWS_AS(load_driving("/nonexistent/sle_driving.txt"), io_error);
    CHECK_THROWS_AS(load_brownian("/nonexistent/sle_bsample.txt"), io_error);

    const std::string path = testutil::temp_path("sle_test_bad.txt");
    {
        std::ofstream out(path);
        out << "garbage that is not a driving file\n1 2 3\n";
    }
    CHECK_THROWS_AS(load_driving(path), io_error);
    CHECK_THROWS_AS(load_brownian(path), io_error);

    {
        std::ofstream out(path);
        out << "# sle-kappa driving v99, T=1, n=2, interp=linear\n0\n1\n";
    }
    CHECK_THROWS_AS(load_driving(path), io_error);

    {
        std::ofstream out(path);
        out << "# sle-kappa driving v1, T=1, n=5, interp=linear\n0\n1\n";
    }
    CHECK_THROWS_AS(load_driving(path), io_error);

    {
        std::ofstream out(path);
        out << "# sle-kappa driving v1, T=1, n=2, interp=linear\n0\nnot_a_number\n";
    }
    CHECK_THROWS_AS(load_driving(path), io_error);
    std::remove(path.c_str());
}

TEST_CASE("seeded run reproduces bit-exactly") {
    auto a = brownian_sample(123456789, 12);
    auto b = brownian_sample(123456789, 12);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(a.values[k] == b.values[k]);
}

#include "sle/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sle/exponents.hpp"

namespace sle {

double WhitneyBox::t_lo() const { return static_cast<double>(j - 1) * std::ldexp(1.0, -2 * n); }
double WhitneyBox::t_hi() const { return static_cast<double>(j) * std::ldexp(1.0, -2 * n); }
double WhitneyBox::y_lo() const { return std::ldexp(1.0, -n); }
double WhitneyBox::y_hi() const { return std::ldexp(1.0, -n + 1); }
double WhitneyBox::kappa_lo() const { return static_cast<double>(ell - 1) * std::exp2(-q * n); }
double WhitneyBox::kappa_hi() const { return static_cast<double>(ell) * std::exp2(-q * n); }

CornerPoint WhitneyBox::corner() const { return {t_hi(), y_lo(), kappa_hi()}; }

void check_box_level(int n, double q) {
    if (n < 1) throw domain_error("whitney: level n must be >= 1");
    if (!(q > 0.0)) throw domain_error("whitney: q must be positive");
    if (static_cast<double>(n) * std::max(2.0, q) > 40.0)
        throw domain_error("whitney: level too deep, box indices would overflow");
}

std::int64_t kappa_cells(int n, double q, double kappa_max) {
    check_box_level(n, q);
    if (!(kappa_max > 0.0)) throw domain_error("whitney: kappa_max must be positive");
    return static_cast<std::int64_t>(std::ceil(kappa_max * std::exp2(q * n)));
}

std::int64_t box_count(int n, double q, double kappa_max) {
    return (std::int64_t{1} << (2 * n)) * kappa_cells(n, q, kappa_max);
}

WhitneyBox box_at(int n, double q, double kappa_max, std::int64_t index) {
    const std::int64_t kc = kappa_cells(n, q, kappa_max);
    if (index < 0 || index >= box_count(n, q, kappa_max))
        throw domain_error("box_at: index out of range");
    WhitneyBox b;
    b.n = n;
    b.q = q;
    b.j = index / kc + 1;
    b.ell = index % kc + 1;
    return b;
}

WhitneyBox box_containing(int n, double q, double t, double kappa) {
    check_box_level(n, q);
    if (t < 0.0 || t > 1.0) throw domain_error("box_containing: t must lie in [0, 1]");
    if (kappa < 0.0) throw domain_error("box_containing: kappa must be nonnegative");
    WhitneyBox b;
    b.n = n;
    b.q = q;
    b.j = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::ceil(t * std::ldexp(1.0, 2 * n))), 1,
        std::int64_t{1} << (2 * n));
    b.ell = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(kappa * std::exp2(q * n))));
    return b;
}

bool boxes_adjacent(const WhitneyBox& a, const WhitneyBox& b) {
    const bool t_meet = a.t_lo() <= b.t_hi() && b.t_lo() <= a.t_hi();
    const bool y_meet = a.y_lo() <= b.y_hi() && b.y_lo() <= a.y_hi();
    const bool k_meet = a.kappa_lo() <= b.kappa_hi() && b.kappa_lo() <= a.kappa_hi();
    return t_meet && y_meet && k_meet;
}

double box_image_diameter(const BrownianSample& sample, const WhitneyBox& box, int m,
                          std::optional<double> kappa_fixed) {
    if (m < 2) throw domain_error("box_image_diameter: need m >= 2 sub-grid points");
    if (sample.level < 2 * box.n)
        throw domain_error("box_image_diameter: sample level below the box time scale");
    std::vector<double> kappas;
    if (kappa_fixed) {
        kappas.push_back(*kappa_fixed);
    } else {
        const double klo = box.kappa_lo(), khi = box.kappa_hi();
        for (int i = 0; i < m; ++i)
            kappas.push_back(klo + (khi - klo) * static_cast<double>(i) / (m - 1));
    }
    const double tlo = box.t_lo(), thi = box.t_hi();
    const double ylo = box.y_lo(), yhi = box.y_hi();
    std::vector<cplx> image;
    image.reserve(kappas.size() * static_cast<std::size_t>(m) * m);
    for (double kappa : kappas) {
        const DrivingTerm drv = scale_to_driving(sample, kappa);
        const LoewnerChain chain = make_chain(drv);
        for (int a = 0; a < m; ++a) {
            const double t = tlo + (thi - tlo) * static_cast<double>(a) / (m - 1);
            const double w = drv.value_at(t);
            for (int b = 0; b < m; ++b) {
                const double y = ylo + (yhi - ylo) * static_cast<double>(b) / (m - 1);
                image.push_back(reverse_flow(chain, t, HalfPlanePoint(w, y)).c());
            }
        }
    }
    double diam = 0.0;
    for (std::size_t a = 0; a < image.size(); ++a)
        for (std::size_t b = a + 1; b < image.size(); ++b)
            diam = std::max(diam, std::abs(image[a] - image[b]));
    return diam;
}

DecayFit decay_fit(const BrownianSample& sample, double q, double kappa_lo, double kappa_hi,
                   int n_lo, int n_hi, int boxes_per_level, std::uint64_t pick_seed, int m,
                   unsigned threads, std::vector<BoxStat>* box_stats) {
    if (n_lo < 1 || n_hi < n_lo) throw domain_error("decay_fit: bad level range");
    if (kappa_lo < 0.0 || kappa_hi < kappa_lo) throw domain_error("decay_fit: bad kappa range");
    if (boxes_per_level < 0) throw domain_error("decay_fit: boxes_per_level must be >= 0");
    const bool collapsed = kappa_lo == kappa_hi;

    struct Task {
        WhitneyBox box;
        int level_slot;
    };
    std::vector<Task> tasks;
    std::uint64_t counter = 0;
    for (int n = n_lo; n <= n_hi; ++n) {
        check_box_level(n, q);
        const std::int64_t j_max = std::int64_t{1} << (2 * n);
        std::int64_t ell_lo = 1, ell_hi = 1;
        if (!collapsed) {
            ell_lo = box_containing(n, q, 0.0, kappa_lo).ell;
            ell_hi = box_containing(n, q, 0.0, kappa_hi).ell;
        } else if (kappa_lo > 0.0) {
            ell_lo = ell_hi = box_containing(n, q, 0.0, kappa_lo).ell;
        }
        auto add = [&](std::int64_t j, std::int64_t ell) {
            tasks.push_back({WhitneyBox{n, j, ell, q}, n - n_lo});
        };
        add(1, ell_lo);
        add(j_max, ell_lo);
        for (int b = 0; b < boxes_per_level; ++b) {
            const std::int64_t j =
                1 + static_cast<std::int64_t>(rng::keyed_u64(pick_seed, counter++) %
                                              static_cast<std::uint64_t>(j_max));
            const std::int64_t ell =
                ell_lo + static_cast<std::int64_t>(rng::keyed_u64(pick_seed, counter++) %
                                                   static_cast<std::uint64_t>(ell_hi - ell_lo + 1));
            add(j, ell);
        }
    }

    std::vector<double> diameters(tasks.size());
    const std::optional<double> kappa_fixed =
        collapsed ? std::optional<double>(kappa_lo) : std::nullopt;
    parallel_for(tasks.size(), threads, [&](std::size_t i) {
        diameters[i] = box_image_diameter(sample, tasks[i].box, m, kappa_fixed);
    });

    DecayFit fit{};
    fit.levels.reserve(static_cast<std::size_t>(n_hi - n_lo + 1));
    for (int n = n_lo; n <= n_hi; ++n) fit.levels.push_back({n, 0.0});
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        auto& lv = fit.levels[static_cast<std::size_t>(tasks[i].level_slot)];
        lv.max_diameter = std::max(lv.max_diameter, diameters[i]);
    }
    if (box_stats) {
        box_stats->clear();
        box_stats->reserve(tasks.size());
        for (std::size_t i = 0; i < tasks.size(); ++i)
            box_stats->push_back({tasks[i].box, diameters[i]});
    }

    std::vector<double> xs, ys;
    for (const LevelMax& lv : fit.levels) {
        if (!(lv.max_diameter > 0.0))
            throw domain_error("decay_fit: zero diameter at a level, nothing to fit");
        xs.push_back(static_cast<double>(lv.n));
        ys.push_back(std::log2(lv.max_diameter));
    }
    const LinearFit lf = fit_line(xs, ys);
    fit.delta_hat = -lf.slope;
    fit.intercept = lf.intercept;
    fit.residual = lf.max_residual;
    const double b = beta_prime(kappa_hi);
    fit.theoretical_delta =
        b <= 1.0 ? delta_exponent(b, q) : std::numeric_limits<double>::quiet_NaN();
    return fit;
}

namespace {

int stopping_level_t(double gap) {
    int n = 1;
    while (std::ldexp(1.0, -2 * n) > gap) ++n;
    return n;
}

int stopping_level_kappa(double gap, double q) {
    int n = 1;
    while (std::exp2(-q * static_cast<double>(n)) > gap) ++n;
    return n;
}

}  // namespace

std::vector<WhitneyBox> geodesic_chain(double t1, double kappa1, double t2, double kappa2,
                                       double q) {
    if (!(q > 0.0)) throw domain_error("geodesic_chain: q must be positive");
    const double dt = std::abs(t1 - t2);
    const double dk = std::abs(kappa1 - kappa2);
    if (dt == 0.0 && dk == 0.0)
        throw domain_error("geodesic_chain: endpoints coincide");
    int n_stop = std::numeric_limits<int>::max();
    if (dt > 0.0) n_stop = std::min(n_stop, stopping_level_t(dt));
    if (dk > 0.0) n_stop = std::min(n_stop, stopping_level_kappa(dk, q));
    const int n_max = static_cast<int>(40.0 / std::max(2.0, q));
    check_box_level(std::min(n_stop, n_max), q);
    if (n_stop > n_max)
        throw domain_error("geodesic_chain: endpoints too close, stopping level overflows");
    const int n_deep = std::min(2 * n_stop, n_max);

    std::vector<WhitneyBox> chain;
    auto push = [&chain](const WhitneyBox& b) {
        if (chain.empty() || chain.back().j != b.j || chain.back().ell != b.ell ||
            chain.back().n != b.n)
            chain.push_back(b);
    };

    // Leg 1 rises from the deep level to the stopping level above (t1, kappa1).
    for (int n = n_deep; n >= n_stop; --n) push(box_containing(n, q, t1, kappa1));
    // Cross at the stopping level: walk the t cells, then the kappa cells.
    const WhitneyBox from = box_containing(n_stop, q, t1, kappa1);
    const WhitneyBox to = box_containing(n_stop, q, t2, kappa2);
    WhitneyBox cur = from;
    while (cur.j != to.j) {
        cur.j += cur.j < to.j ? 1 : -1;
        push(cur);
    }
    while (cur.ell != to.ell) {
        cur.ell += cur.ell < to.ell ? 1 : -1;
        push(cur);
    }
    // Leg 2 descends back to the deep level above (t2, kappa2).
    for (int n = n_stop; n <= n_deep; ++n) push(box_containing(n, q, t2, kappa2));
    return chain;
}

}  // namespace sle

#include "sle/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "json.hpp"
#include "sle/exponents.hpp"
#include "sle/perturbation.hpp"

namespace sle {

double derivative_at_corner(const BrownianSample& sample, const CornerPoint& p) {
    if (p.t < 0.0 || p.t > 1.0)
        throw domain_error("derivative_at_corner: t outside the sample horizon");
    if (!(p.y > 0.0)) throw domain_error("derivative_at_corner: y must be positive");
    const DrivingTerm drv = scale_to_driving(sample, p.kappa);
    const LoewnerChain chain = make_chain(drv);
    const HalfPlanePoint z(drv.value_at(p.t), p.y);
    return std::abs(reverse_flow_derivative(chain, p.t, z));
}

namespace {

struct WilsonInterval {
    double lo;
    double hi;
};

WilsonInterval wilson95(std::int64_t count, std::int64_t total) {
    const double z = 1.959963984540054;
    const double nn = static_cast<double>(total);
    const double p = static_cast<double>(count) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

nlohmann::ordered_json scan_config(const DerivativeScan& s) {
    nlohmann::ordered_json c;
    c["kappa"] = s.kappa;
    c["beta"] = s.beta;
    c["n"] = s.n;
    c["level"] = s.level;
    c["samples"] = s.samples;
    c["seed"] = s.seed;
    auto js = nlohmann::ordered_json::array();
    for (const ScanRow& r : s.rows) js.push_back(r.j);
    c["j_list"] = js;
    return c;
}

}  // namespace

DerivativeScan derivative_scan(double kappa, double beta, int n,
                               const std::vector<std::int64_t>& j_list, std::int64_t samples,
                               std::uint64_t seed, int level, unsigned threads,
                               std::vector<std::vector<double>>* raw) {
    if (!(kappa >= 0.0)) throw domain_error("derivative_scan: kappa must be nonnegative");
    if (!(beta > 0.0) || !(beta < 1.0))
        throw domain_error("derivative_scan: beta must lie in (0, 1)");
    if (n < 1) throw domain_error("derivative_scan: n must be >= 1");
    if (samples < 2) throw domain_error("derivative_scan: need at least two samples");
    if (j_list.size() < 2) throw domain_error("derivative_scan: need at least two j values");
    if (level == 0) level = 2 * n + 4;
    if (level < 2 * n)
        throw domain_error("derivative_scan: level below 2n cannot resolve t = j 4^-n");
    if (level > kMaxBrownianLevel) throw domain_error("derivative_scan: level above 30");

    const std::int64_t j_cap = std::int64_t{1} << (2 * n);
    std::int64_t j_min = j_list.front(), j_max = j_list.front();
    for (std::int64_t j : j_list) {
        if (j < 1 || j > j_cap) throw domain_error("derivative_scan: j outside [1, 4^n]");
        j_min = std::min(j_min, j);
        j_max = std::max(j_max, j);
    }
    if (std::log10(static_cast<double>(j_max) / static_cast<double>(j_min)) < 1.5)
        throw domain_error("derivative_scan: j_list must span at least 1.5 decades");

    DerivativeScan out;
    out.kappa = kappa;
    out.beta = beta;
    out.n = n;
    out.level = level;
    out.samples = samples;
    out.seed = seed;
    if (kappa > 0.0) {
        const ExponentParams p = exponent_params(kappa, beta);
        out.lambda = p.lambda;
        out.zeta = p.zeta;
    } else {
        out.lambda = std::numeric_limits<double>::infinity();
        out.zeta = std::numeric_limits<double>::infinity();
    }
    out.threshold = std::exp2(static_cast<double>(n) * beta);
    out.target_slope = -0.5 * out.zeta;

    const double y = std::ldexp(1.0, -n);
    const std::size_t jn = j_list.size();
    std::vector<std::vector<double>> values(jn,
                                            std::vector<double>(static_cast<std::size_t>(samples)));
    parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
        const BrownianSample bs = brownian_sample(rng::split_seed(seed, i), level);
        const DrivingTerm drv = scale_to_driving(bs, kappa);
        const LoewnerChain chain = make_chain(drv);
        for (std::size_t a = 0; a < jn; ++a) {
            const double t = std::ldexp(static_cast<double>(j_list[a]), -2 * n);
            const HalfPlanePoint z(drv.value_at(t), y);
            values[a][i] = std::abs(reverse_flow_derivative(chain, t, z));
        }
    });

    const double markov_scale = std::exp2(-static_cast<double>(n) * out.lambda * beta);
    out.rows.resize(jn);
    std::vector<double> xs, ys;
    for (std::size_t a = 0; a < jn; ++a) {
        ScanRow& r = out.rows[a];
        r.j = j_list[a];
        r.t = std::ldexp(static_cast<double>(r.j), -2 * n);
        double sum = 0.0, sum2 = 0.0;
        std::int64_t count = 0;
        for (double v : values[a]) {
            const double p = std::pow(v, out.lambda);
            sum += p;
            sum2 += p * p;
            if (v >= out.threshold) ++count;
        }
        const double mean = sum / static_cast<double>(samples);
        const double var =
            std::max(0.0, sum2 / static_cast<double>(samples) - mean * mean);
        r.mean_pow = mean;
        r.stderr_pow = std::sqrt(var / static_cast<double>(samples));
        r.tail_count = count;
        r.tail_freq = static_cast<double>(count) / static_cast<double>(samples);
        const WilsonInterval ci = wilson95(count, samples);
        r.tail_ci_lo = ci.lo;
        r.tail_ci_hi = ci.hi;
        const double jz = std::pow(static_cast<double>(r.j), -0.5 * out.zeta);
        r.envelope_markov = markov_scale * jz;
        r.envelope_display = jz / markov_scale;
        r.markov_rhs = mean * markov_scale;
        xs.push_back(std::log2(static_cast<double>(r.j)));
        ys.push_back(std::log2(mean));
    }
    // kappa = 0 pins lambda at infinity and the means at 0; skip the fit.
    bool fittable = true;
    for (double v : ys)
        if (!std::isfinite(v)) fittable = false;
    if (fittable) out.fit = fit_line(xs, ys);
    if (raw) *raw = std::move(values);
    return out;
}

std::string DerivativeScan::moment_json() const {
    nlohmann::ordered_json j;
    j["report"] = "moment-scan";
    j["config"] = scan_config(*this);
    j["lambda"] = lambda;
    j["zeta"] = zeta;
    j["target_slope"] = target_slope;
    auto rws = nlohmann::ordered_json::array();
    for (const ScanRow& r : rows) {
        rws.push_back({{"j", r.j},
                       {"t", r.t},
                       {"mean_pow_lambda", r.mean_pow},
                       {"stderr", r.stderr_pow}});
    }
    j["rows"] = rws;
    j["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
    return j.dump(2);
}

std::string DerivativeScan::tail_json() const {
    nlohmann::ordered_json j;
    j["report"] = "tail-scan";
    j["config"] = scan_config(*this);
    j["lambda"] = lambda;
    j["zeta"] = zeta;
    j["threshold"] = threshold;
    auto rws = nlohmann::ordered_json::array();
    for (const ScanRow& r : rows) {
        nlohmann::ordered_json row;
        row["j"] = r.j;
        row["count"] = r.tail_count;
        row["freq"] = r.tail_freq;
        row["ci"] = {r.tail_ci_lo, r.tail_ci_hi};
        row["envelope_markov"] = r.envelope_markov;
        row["ratio_markov"] = r.envelope_markov > 0.0 ? r.tail_freq / r.envelope_markov : 0.0;
        row["envelope_display"] = r.envelope_display;
        row["ratio_display"] = r.envelope_display > 0.0 ? r.tail_freq / r.envelope_display : 0.0;
        row["markov_rhs"] = r.markov_rhs;
        row["zero_events"] = r.tail_count == 0;
        rws.push_back(row);
    }
    j["rows"] = rws;
    return j.dump(2);
}

ContinuityScan continuity_scan(std::uint64_t seed, double kappa_base,
                               const std::vector<double>& dkappas, int t_count, double y0,
                               int level, unsigned threads) {
    if (!(kappa_base >= 0.0)) throw domain_error("continuity_scan: kappa_base must be >= 0");
    if (dkappas.empty()) throw domain_error("continuity_scan: need at least one dkappa");
    for (double d : dkappas)
        if (!(d >= 0.0)) throw domain_error("continuity_scan: dkappa values must be nonnegative");
    if (t_count < 3) throw domain_error("continuity_scan: need at least three grid times");
    if (!(y0 > 0.0)) throw domain_error("continuity_scan: y0 must be positive");
    if (level < 1 || level > kMaxBrownianLevel) throw domain_error("continuity_scan: bad level");
    if (y0 * y0 < std::ldexp(1.0, -level))
        throw domain_error("continuity_scan: level too coarse for y0, need y0^2 >= 2^-level");

    std::vector<double> deltas = dkappas;
    std::sort(deltas.begin(), deltas.end(), std::greater<>());

    ContinuityScan out;
    out.seed = seed;
    out.kappa_base = kappa_base;
    out.y0 = y0;
    out.level = level;
    out.t_count = t_count;

    const BrownianSample bs = brownian_sample(seed, level);
    std::vector<double> kappas{kappa_base};
    for (double d : deltas) kappas.push_back(kappa_base + d);

    std::vector<double> times(static_cast<std::size_t>(t_count));
    for (int i = 0; i < t_count; ++i)
        times[static_cast<std::size_t>(i)] = static_cast<double>(i) / (t_count - 1);

    // One slot per (kappa, t): trace point and |F'| there.
    const std::size_t nk = kappas.size(), nt = times.size();
    std::vector<cplx> pts(nk * nt);
    std::vector<double> dmod(nk * nt);
    std::vector<DrivingTerm> drvs;
    drvs.reserve(nk);
    for (double k : kappas) drvs.push_back(scale_to_driving(bs, k));
    std::vector<LoewnerChain> chains;
    chains.reserve(nk);
    for (const DrivingTerm& d : drvs) chains.push_back(make_chain(d));

    parallel_for(nk * nt, threads, [&](std::size_t idx) {
        const std::size_t ik = idx / nt, it = idx % nt;
        const double t = times[it];
        const HalfPlanePoint z(drvs[ik].value_at(t), y0);
        const FlowValue fv = reverse_flow_with_derivative(chains[ik], t, z);
        pts[idx] = fv.point.c();
        dmod[idx] = std::abs(fv.derivative);
    });

    auto max_dmod = [&](std::size_t ik) {
        double m = 0.0;
        for (std::size_t it = 0; it < nt; ++it) m = std::max(m, dmod[ik * nt + it]);
        return m;
    };
    const double base_dmod = max_dmod(0);

    out.rows.resize(deltas.size());
    out.quantum = 0.0;
    for (std::size_t a = 0; a < deltas.size(); ++a) {
        ContinuityRow& r = out.rows[a];
        r.dkappa = deltas[a];
        r.epsilon = sup_distance(drvs[0], drvs[a + 1]);
        double dist = 0.0;
        for (std::size_t it = 0; it < nt; ++it)
            dist = std::max(dist, std::abs(pts[it] - pts[(a + 1) * nt + it]));
        r.distance = dist;
        r.basic = basic_bound(r.epsilon, 1.0, y0);
        r.tip = 2.0 * y0 * std::max(base_dmod, max_dmod(a + 1));
        r.within_bound = r.distance <= r.basic + r.tip;
        out.quantum = std::max(out.quantum, r.tip);
    }

    out.monotone_ok = true;
    for (std::size_t a = 0; a + 1 < out.rows.size(); ++a)
        if (out.rows[a + 1].distance > out.rows[a].distance + out.quantum)
            out.monotone_ok = false;

    std::vector<double> lx, ly;
    for (const ContinuityRow& r : out.rows) {
        if (r.distance > 0.0) {
            lx.push_back(std::log(r.dkappa));
            ly.push_back(std::log(r.distance));
        }
    }
    if (lx.size() >= 2) {
        const LinearFit ef = fit_line(lx, ly);
        out.eta_hat = ef.slope;
        out.eta_fit_r2 = ef.r2;
    }

    // Lag modulus of the base trace over dyadic grid lags.
    std::vector<double> ax, ay;
    const double grid_dt = times[1] - times[0];
    for (std::size_t lag = 1; lag < nt; lag *= 2) {
        double m = 0.0;
        for (std::size_t it = 0; it + lag < nt; ++it)
            m = std::max(m, std::abs(pts[it + lag] - pts[it]));
        if (m > 0.0) {
            ax.push_back(std::log(static_cast<double>(lag) * grid_dt));
            ay.push_back(std::log(m));
        }
    }
    if (ax.size() >= 2) {
        const LinearFit af = fit_line(ax, ay);
        out.alpha_hat = af.slope;
        out.alpha_fit_r2 = af.r2;
    }

    const double bp = beta_prime(kappa_base);
    out.eta_lower_theory =
        bp <= 1.0 ? eta_lower(kappa_base) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

std::string ContinuityScan::to_json() const {
    nlohmann::ordered_json j;
    j["report"] = "continuity-scan";
    nlohmann::ordered_json c;
    c["seed"] = seed;
    c["kappa_base"] = kappa_base;
    c["y0"] = y0;
    c["level"] = level;
    c["t_count"] = t_count;
    auto ds = nlohmann::ordered_json::array();
    for (const ContinuityRow& r : rows) ds.push_back(r.dkappa);
    c["dkappas"] = ds;
    j["config"] = c;
    auto rws = nlohmann::ordered_json::array();
    for (const ContinuityRow& r : rows) {
        rws.push_back({{"dkappa", r.dkappa},
                       {"epsilon", r.epsilon},
                       {"distance", r.distance},
                       {"basic_bound", r.basic},
                       {"tip_term", r.tip},
                       {"within_bound", r.within_bound}});
    }
    j["rows"] = rws;
    j["eta_hat"] = eta_hat;
    j["eta_fit_r2"] = eta_fit_r2;
    j["alpha_hat"] = alpha_hat;
    j["alpha_fit_r2"] = alpha_fit_r2;
    j["eta_lower_theory"] = eta_lower_theory;
    j["quantum"] = quantum;
    j["monotone_ok"] = monotone_ok;
    return j.dump(2);
}

}  // namespace sle

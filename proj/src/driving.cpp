#include "sle/driving.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace sle {

namespace rng {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace

std::uint64_t keyed_u64(std::uint64_t seed, std::uint64_t counter) {
    // Re-inject the seed between two finalizer rounds so (seed, counter)
    // pairs never alias through the additive pre-mix.
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
    x = mix64(x);
    x ^= mix64(seed ^ 0xd1b54a32d192ed03ULL);
    return mix64(x);
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
    return (static_cast<double>(keyed_u64(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

double gaussian(std::uint64_t seed, std::uint64_t counter) {
    const double u1 = uniform01(seed, 2 * counter);
    const double u2 = uniform01(seed, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    return keyed_u64(seed ^ 0x53706c6974ULL, stream);
}

}  // namespace rng

BrownianSample brownian_sample(std::uint64_t seed, int level) {
    if (level < 0 || level > kMaxBrownianLevel)
        throw domain_error("brownian_sample: level must be in [0, 30]");
    BrownianSample s;
    s.seed = seed;
    s.level = level;
    const std::size_t n = (std::size_t{1} << level) + 1;
    s.values.assign(n, 0.0);
    s.values[0] = 0.0;
    s.values[n - 1] = rng::gaussian(seed, 0);
    // Midpoint at refinement stage ell has node id 2^ell + m and bridge
    // variance 2^-(ell+2); the value at a dyadic point is computed once, so
    // deeper levels extend shallower ones bit-exactly.
    for (int ell = 0; ell < level; ++ell) {
        const std::size_t stride = std::size_t{1} << (level - ell);
        const std::size_t half = stride / 2;
        const double sd = std::sqrt(std::ldexp(1.0, -(ell + 2)));
        for (std::size_t m = 0; m < (std::size_t{1} << ell); ++m) {
            const std::size_t i = m * stride;
            const std::uint64_t id = (std::uint64_t{1} << ell) + m;
            s.values[i + half] =
                0.5 * (s.values[i] + s.values[i + stride]) + sd * rng::gaussian(seed, id);
        }
    }
    return s;
}

const char* interp_tag(Interp interp) {
    return interp == Interp::linear ? "linear" : "piecewise-constant-left";
}

Interp interp_from_tag(const std::string& tag) {
    if (tag == "linear") return Interp::linear;
    if (tag == "piecewise-constant-left") return Interp::piecewise_constant_left;
    throw io_error("unknown interpolation tag '" + tag + "'");
}

double DrivingTerm::value_at(double t) const {
    if (t < 0.0 || t > t_max * (1.0 + 1e-12))
        throw domain_error("DrivingTerm: time outside [0, t_max]");
    const std::size_t n = values.size();
    if (t >= t_max) return values[n - 1];
    const double u = t / grid_dt();
    const std::size_t k = std::min(static_cast<std::size_t>(u), n - 2);
    if (interp == Interp::piecewise_constant_left) return values[k];
    const double frac = u - static_cast<double>(k);
    return values[k] + frac * (values[k + 1] - values[k]);
}

DrivingTerm scale_to_driving(const BrownianSample& sample, double kappa) {
    if (kappa < 0.0) throw domain_error("scale_to_driving: kappa must be nonnegative");
    DrivingTerm term;
    term.t_max = 1.0;
    term.interp = Interp::piecewise_constant_left;
    const double root = std::sqrt(kappa);
    term.values.reserve(sample.values.size());
    for (double b : sample.values) term.values.push_back(root * b);
    return term;
}

DrivingTerm deterministic_driver(DriverKind kind, double c, double t_max, std::size_t points) {
    if (!(t_max > 0.0)) throw domain_error("deterministic_driver: t_max must be positive");
    if (points < 2) throw domain_error("deterministic_driver: need at least two grid points");
    DrivingTerm term;
    term.t_max = t_max;
    term.values.resize(points);
    const double dt = t_max / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) {
        const double t = static_cast<double>(k) * dt;
        switch (kind) {
            case DriverKind::zero: term.values[k] = 0.0; break;
            case DriverKind::constant: term.values[k] = c; break;
            case DriverKind::linear: term.values[k] = c * t; break;
            case DriverKind::sqrt: term.values[k] = c * std::sqrt(t); break;
        }
    }
    return term;
}

double sup_distance(const DrivingTerm& a, const DrivingTerm& b) {
    if (a.values.size() != b.values.size() || a.t_max != b.t_max)
        throw domain_error("sup_distance: grids do not match");
    double d = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        d = std::max(d, std::abs(a.values[k] - b.values[k]));
    return d;
}

LoewnerChain make_chain(const DrivingTerm& term) {
    const std::size_t steps = term.values.size() - 1;
    std::vector<double> dt(steps, term.grid_dt());
    std::vector<double> w(term.values.begin(), term.values.end() - 1);
    return LoewnerChain(std::move(dt), std::move(w));
}

namespace {

std::string header_field(const std::string& header, const std::string& key) {
    const auto pos = header.find(key + "=");
    if (pos == std::string::npos) throw io_error("header missing field '" + key + "'");
    auto end = header.find(',', pos);
    if (end == std::string::npos) end = header.size();
    return header.substr(pos + key.size() + 1, end - (pos + key.size() + 1));
}

void check_version(const std::string& header, const std::string& magic) {
    if (header.rfind("# " + magic + " v1,", 0) == 0) return;
    if (header.rfind("# " + magic + " v", 0) == 0)
        throw io_error(magic + ": unsupported format version");
    throw io_error(magic + ": not a " + magic + " file");
}

double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == 0) throw io_error(context);
        return v;
    } catch (const std::exception&) {
        throw io_error(context + ": cannot parse '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s, const std::string& context) {
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw io_error(context + ": cannot parse '" + s + "'");
    }
}

}  // namespace

void save_driving(const DrivingTerm& term, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << "# sle-kappa driving v1, T=" << fmt17(term.t_max) << ", n=" << term.values.size()
        << ", interp=" << interp_tag(term.interp) << "\n";
    const double dt = term.grid_dt();
    for (std::size_t k = 0; k < term.values.size(); ++k)
        out << fmt17(static_cast<double>(k) * dt) << "," << fmt17(term.values[k]) << "\n";
    if (!out) throw io_error("write failed for '" + path + "'");
}

DrivingTerm load_driving(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw io_error("'" + path + "': empty file");
    check_version(header, "sle-kappa driving");
    DrivingTerm term;
    term.t_max = parse_double(header_field(header, "T"), path);
    const std::size_t n = static_cast<std::size_t>(parse_u64(header_field(header, "n"), path));
    term.interp = interp_from_tag(header_field(header, "interp"));
    if (n < 2 || !(term.t_max > 0.0)) throw io_error("'" + path + "': bad header values");
    term.values.reserve(n);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw io_error("'" + path + "': malformed row '" + line + "'");
        term.values.push_back(parse_double(line.substr(comma + 1), path));
    }
    if (term.values.size() != n)
        throw io_error("'" + path + "': expected " + std::to_string(n) + " rows, got " +
                       std::to_string(term.values.size()));
    return term;
}

void save_brownian(const BrownianSample& sample, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << "# sle-kappa bsample v1, seed=" << sample.seed << ", level=" << sample.level << "\n";
    for (double v : sample.values) out << fmt17(v) << "\n";
    if (!out) throw io_error("write failed for '" + path + "'");
}

BrownianSample load_brownian(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw io_error("'" + path + "': empty file");
    check_version(header, "sle-kappa bsample");
    BrownianSample sample;
    sample.seed = parse_u64(header_field(header, "seed"), path);
    sample.level = static_cast<int>(parse_u64(header_field(header, "level"), path));
    if (sample.level < 0 || sample.level > kMaxBrownianLevel)
        throw io_error("'" + path + "': bad level");
    const std::size_t n = (std::size_t{1} << sample.level) + 1;
    sample.values.reserve(n);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        sample.values.push_back(parse_double(line, path));
    }
    if (sample.values.size() != n)
        throw io_error("'" + path + "': expected " + std::to_string(n) + " values, got " +
                       std::to_string(sample.values.size()));
    return sample;
}

}  // namespace sle

// Command-line front end: reproducible experiment runs over the library
// modules with CSV/JSON emission.  Exit codes: 0 success, 2 configuration
// error, 3 numerical-domain error, 4 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sle/common.hpp"
#include "sle/driving.hpp"
#include "sle/exponents.hpp"
#include "sle/loewner.hpp"
#include "sle/montecarlo.hpp"
#include "sle/perturbation.hpp"
#include "sle/whitney.hpp"

namespace {

using nlohmann::ordered_json;
using namespace sle;

struct GlobalOpts {
    std::uint64_t seed = 1;
    int level = 12;
    bool level_set = false;
    double y0 = 0.0;  // 0 selects sqrt of the chain's largest step
    unsigned threads = 1;
    std::string out;
    std::string config_path;
};

void write_text(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open output file: " + path);
    f << content;
    if (!f) throw io_error("write failed: " + path);
}

std::string csv_header(const std::string& echo) {
    std::string h = "# ";
    h += kVersion;
    h += "\n# ";
    h += echo;
    h += "\n";
    return h;
}

ordered_json json_wrap(const ordered_json& config) {
    ordered_json j;
    j["version"] = kVersion;
    j["config"] = config;
    return j;
}

double resolve_y0(double y0_flag, const LoewnerChain& chain) {
    return y0_flag > 0.0 ? y0_flag : std::sqrt(chain.dt_max());
}

std::string num(double v) { return fmt17(v); }

std::string list_echo(const std::vector<double>& vs) {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) s += ",";
        s += num(vs[i]);
    }
    return s;
}

// ---------------------------------------------------------------- trace ----

struct TraceOpts {
    std::vector<double> kappas;
    std::string driver;
    double c = 0.0;
    std::size_t steps = 4096;
    double t_max = 1.0;
    int samples = 129;
};

int run_trace(const GlobalOpts& g, const TraceOpts& o) {
    if (o.driver.empty() == o.kappas.empty()) {
        std::cerr << "trace: give exactly one of --driver or --kappa\n";
        return 2;
    }
    std::ostringstream csv;

    auto emit = [&](const LoewnerChain& chain, double t_max, std::optional<double> kappa,
                    double y0) {
        std::vector<double> times(static_cast<std::size_t>(o.samples));
        for (int i = 0; i < o.samples; ++i)
            times[static_cast<std::size_t>(i)] = t_max * i / (o.samples - 1);
        Trace tr = trace(chain, times, y0);
        for (const TraceSample& s : tr.samples) {
            if (kappa) csv << num(*kappa) << ",";
            csv << num(s.t) << "," << num(s.point.re) << "," << num(s.point.im) << "\n";
        }
    };

    std::ostringstream echo;
    echo << "cmd=trace seed=" << g.seed << " level=" << g.level << " samples=" << o.samples;

    if (!o.driver.empty()) {
        DriverKind kind = DriverKind::zero;
        if (o.driver == "constant") kind = DriverKind::constant;
        else if (o.driver == "linear") kind = DriverKind::linear;
        else if (o.driver == "sqrt") kind = DriverKind::sqrt;
        auto term = deterministic_driver(kind, o.c, o.t_max, o.steps + 1);
        auto chain = make_chain(term);
        const double y0 = resolve_y0(g.y0, chain);
        echo << " driver=" << o.driver << " c=" << num(o.c) << " steps=" << o.steps
             << " t-max=" << num(o.t_max) << " y0=" << num(y0) << " columns=t,re,im";
        emit(chain, o.t_max, std::nullopt, y0);
    } else {
        auto sample = brownian_sample(g.seed, g.level);
        const bool multi = o.kappas.size() > 1;
        echo << " kappa=" << list_echo(o.kappas) << " columns="
             << (multi ? "kappa,t,re,im" : "t,re,im");
        bool first = true;
        for (double kappa : o.kappas) {
            auto chain = make_chain(scale_to_driving(sample, kappa));
            const double y0 = resolve_y0(g.y0, chain);
            if (first) {
                echo << " y0=" << num(y0);
                first = false;
            }
            emit(chain, 1.0, multi ? std::optional<double>(kappa) : std::nullopt, y0);
        }
    }
    write_text(g.out, csv_header(echo.str()) + csv.str());
    return 0;
}

// ------------------------------------------------------------ exponents ----

int run_exponents(const GlobalOpts& g, std::vector<double> kappas) {
    auto kc = kappa_constants();
    if (kappas.empty())
        kappas = {0.0, 0.5, 1.0, 1.5, 2.0, kc.kappa0, 3.0, 10.0, kc.kappa_inf, 31.0, 35.0};

    std::ostringstream csv;
    auto cell = [](const std::optional<double>& v) {
        return v ? fmt17(*v) : std::string("no-solution");
    };
    for (double kappa : kappas) {
        std::optional<double> bh, bk, al, an, el;
        const double bp = beta_prime(kappa);
        bh = beta_hat(kappa);
        bk = beta_kappa(kappa);
        an = alpha_numeric(kappa);
        if (bp <= 1.0) {
            al = alpha_lower(kappa);
            el = eta_lower(kappa);
        }
        csv << num(kappa) << "," << cell(bh) << "," << cell(bk) << "," << num(bp) << ","
            << cell(al) << "," << cell(an) << "," << cell(el) << "\n";
    }

    std::ostringstream echo;
    echo << "cmd=exponents kappa=" << list_echo(kappas)
         << " columns=kappa,beta_hat,beta_kappa,beta_prime,alpha_lower,alpha_numeric,eta_lower";
    write_text(g.out, csv_header(echo.str()) + csv.str());
    return 0;
}

// --------------------------------------------------------- verify-bounds ----

struct VerifyOpts {
    double kappa = 1.0;
    double dkappa = 0.015625;
    int t_count = 10;
    int y_count = 6;
};

int run_verify_bounds(const GlobalOpts& g, const VerifyOpts& o) {
    auto sample = brownian_sample(g.seed, g.level);
    auto c1 = make_chain(scale_to_driving(sample, o.kappa));
    auto c2 = make_chain(scale_to_driving(sample, o.kappa + o.dkappa));

    std::vector<double> ts;
    for (int i = 1; i <= o.t_count; ++i)
        ts.push_back(static_cast<double>(i) / o.t_count);
    std::vector<cplx> zs;
    for (int i = 1; i <= o.y_count; ++i) zs.push_back(cplx(0.0, std::ldexp(1.0, -i)));

    auto rep = verify_pair(c1, c2, ts, zs, g.threads);

    ordered_json config;
    config["cmd"] = "verify-bounds";
    config["seed"] = g.seed;
    config["level"] = g.level;
    config["kappa"] = o.kappa;
    config["dkappa"] = o.dkappa;
    config["t_count"] = o.t_count;
    config["y_count"] = o.y_count;
    ordered_json out = json_wrap(config);
    out["report"] = ordered_json::parse(rep.to_json());
    write_text(g.out, out.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------ moment/tail scan ----

struct ScanOpts {
    double kappa = 1.0;
    double beta = 0.5;
    int n = 6;
    std::int64_t samples = 10000;
    bool samples_set = false;
    bool quick = false;
    std::vector<std::int64_t> j_list{4, 8, 16, 32, 64, 128, 256, 512, 1024};
};

int run_scan(const GlobalOpts& g, const ScanOpts& o, bool tails) {
    const std::int64_t samples = (o.quick && !o.samples_set) ? 1000 : o.samples;
    const int level = g.level_set ? g.level : 0;  // 0 picks 2n + 4
    auto scan = derivative_scan(o.kappa, o.beta, o.n, o.j_list, samples, g.seed, level,
                                g.threads);

    ordered_json config;
    config["cmd"] = tails ? "tail-scan" : "moment-scan";
    config["quick"] = o.quick;
    ordered_json out = json_wrap(config);
    out["result"] = ordered_json::parse(tails ? scan.tail_json() : scan.moment_json());
    write_text(g.out, out.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------- continuity scan ----

struct ContinuityOpts {
    double kappa = 0.5;
    std::vector<double> dkappas{0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
    int t_count = 65;
};

int run_continuity(const GlobalOpts& g, const ContinuityOpts& o) {
    const int level = g.level_set ? g.level : 16;
    const double y0 = g.y0 > 0.0 ? g.y0 : std::sqrt(std::ldexp(1.0, -level));
    auto scan = continuity_scan(g.seed, o.kappa, o.dkappas, o.t_count, y0, level, g.threads);

    ordered_json config;
    config["cmd"] = "continuity-scan";
    ordered_json out = json_wrap(config);
    out["result"] = ordered_json::parse(scan.to_json());
    write_text(g.out, out.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------- whitney scan ----

struct WhitneyOpts {
    double q = 1.0;
    double kappa_lo = 0.0;
    double kappa_hi = 1.0;
    int n_lo = 2;
    int n_hi = 5;
    int boxes = 16;
    int m = 5;
};

int run_whitney(const GlobalOpts& g, const WhitneyOpts& o) {
    auto sample = brownian_sample(g.seed, g.level);
    std::vector<BoxStat> stats;
    auto fit = decay_fit(sample, o.q, o.kappa_lo, o.kappa_hi, o.n_lo, o.n_hi, o.boxes,
                         rng::split_seed(g.seed, 1), o.m, g.threads, &stats);

    const bool collapsed = o.kappa_lo == o.kappa_hi;
    std::ostringstream csv;
    for (const BoxStat& s : stats) {
        CornerPoint c = s.box.corner();
        if (collapsed) c.kappa = o.kappa_lo;
        const double dmod = derivative_at_corner(sample, c);
        csv << s.box.n << "," << s.box.j << "," << s.box.ell << "," << num(s.box.q) << ","
            << num(s.diameter) << "," << num(dmod) << "\n";
    }

    std::ostringstream echo;
    echo << "cmd=whitney-scan seed=" << g.seed << " level=" << g.level << " q=" << num(o.q)
         << " kappa-lo=" << num(o.kappa_lo) << " kappa-hi=" << num(o.kappa_hi)
         << " n-lo=" << o.n_lo << " n-hi=" << o.n_hi << " boxes=" << o.boxes
         << " m=" << o.m << " columns=n,j,ell,q,diameter,corner_deriv_modulus";

    ordered_json config;
    config["cmd"] = "whitney-scan";
    config["seed"] = g.seed;
    config["level"] = g.level;
    config["q"] = o.q;
    config["kappa_lo"] = o.kappa_lo;
    config["kappa_hi"] = o.kappa_hi;
    config["n_lo"] = o.n_lo;
    config["n_hi"] = o.n_hi;
    config["boxes"] = o.boxes;
    config["m"] = o.m;
    ordered_json out = json_wrap(config);
    out["delta_hat"] = fit.delta_hat;
    out["residual"] = fit.residual;
    out["theoretical_delta"] = fit.theoretical_delta;
    auto levels = ordered_json::array();
    for (const LevelMax& lv : fit.levels)
        levels.push_back({{"n", lv.n}, {"max_diameter", lv.max_diameter}});
    out["levels"] = levels;

    const std::string csv_text = csv_header(echo.str()) + csv.str();
    const std::string json_text = out.dump(2) + "\n";
    if (g.out.empty()) {
        std::cout << csv_text << json_text;
    } else {
        write_text(g.out, csv_text);
        write_text(g.out + ".json", json_text);
    }
    return 0;
}

// ----------------------------------------------------------- config file ----

bool is_value_flag(const std::string& t) {
    return t.rfind("--", 0) == 0 && t.find('=') == std::string::npos && t != "--quick" &&
           t != "--help" && t != "--version";
}

// Returns the config file's tokens as --key=value, checking every key
// against the global options and the invoked subcommand's options.  Keys the
// user also passed as flags are dropped, so flags replace file values even
// for list-valued options.
std::vector<std::string> config_tokens(const std::string& path, CLI::App& app,
                                       CLI::App* sub,
                                       const std::vector<std::string>& user_flags,
                                       int& err) {
    std::vector<std::string> toks;
    std::ifstream f(path);
    if (!f) {
        std::cerr << "cannot read config file: " << path << "\n";
        err = 4;
        return toks;
    }
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "config line " << lineno << ": expected key=value\n";
            err = 2;
            return toks;
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto kend = key.find_last_not_of(" \t");
        key = key.substr(0, kend + 1);
        const auto vbeg = value.find_first_not_of(" \t");
        value = vbeg == std::string::npos ? "" : value.substr(vbeg);
        if (key == "config") {
            std::cerr << "config line " << lineno << ": nested config is not allowed\n";
            err = 2;
            return toks;
        }
        const std::string flag = "--" + key;
        const bool known = app.get_option_no_throw(flag) != nullptr ||
                           (sub && sub->get_option_no_throw(flag) != nullptr);
        if (!known) {
            std::cerr << "config line " << lineno << ": unknown key '" << key << "'\n";
            err = 2;
            return toks;
        }
        if (std::find(user_flags.begin(), user_flags.end(), flag) != user_flags.end())
            continue;
        toks.push_back(flag + "=" + value);
    }
    return toks;
}

}  // namespace

int main(int argc, char** argv) {
    GlobalOpts g;
    TraceOpts trace_o;
    std::vector<double> exp_kappas;
    VerifyOpts verify_o;
    ScanOpts moment_o, tail_o;
    ContinuityOpts cont_o;
    WhitneyOpts whit_o;

    CLI::App app{std::string(kVersion) + " - Loewner evolution experiment runner",
                 "sle-kappa"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    app.add_option("--seed", g.seed, "base RNG seed");
    auto* level_opt =
        app.add_option("--level", g.level, "dyadic refinement level of the Brownian grid")
            ->check(CLI::Range(0, kMaxBrownianLevel));
    app.add_option("--y0", g.y0, "tip cutoff height; 0 selects sqrt of the step size")
        ->check(CLI::Range(0.0, 1e9));
    app.add_option("--threads", g.threads, "worker thread cap; does not affect output")
        ->check(CLI::Range(1u, 1024u));
    app.add_option("--out", g.out, "output path; stdout when empty");
    app.add_option("--config", g.config_path, "key=value config file, overridden by flags");

    const auto list_policy = CLI::MultiOptionPolicy::TakeAll;

    auto* sub_trace = app.add_subcommand("trace", "emit trace samples as CSV");
    sub_trace->add_option("--kappa", trace_o.kappas, "diffusivity values, one trace each")
        ->delimiter(',')
        ->multi_option_policy(list_policy)
        ->check(CLI::Range(0.0, 1e9));
    sub_trace->add_option("--driver", trace_o.driver, "deterministic driving term")
        ->check(CLI::IsMember({"zero", "constant", "linear", "sqrt"}));
    sub_trace->add_option("--c", trace_o.c, "coefficient of the deterministic driver");
    sub_trace->add_option("--steps", trace_o.steps, "step count for deterministic drivers")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 24));
    sub_trace->add_option("--t-max", trace_o.t_max, "horizon for deterministic drivers")
        ->check(CLI::Range(1e-12, 1e12));
    sub_trace->add_option("--samples", trace_o.samples, "number of sample times")
        ->check(CLI::Range(2, 1 << 22));

    auto* sub_exp = app.add_subcommand("exponents", "emit the exponent table as CSV");
    sub_exp->add_option("--kappa", exp_kappas, "diffusivity values, one row each")
        ->delimiter(',')
        ->multi_option_policy(list_policy)
        ->check(CLI::Range(0.0, 1e9));

    auto* sub_verify =
        app.add_subcommand("verify-bounds", "check the perturbation bound on a seeded pair");
    sub_verify->add_option("--kappa", verify_o.kappa, "base diffusivity")
        ->check(CLI::Range(0.0, 1e9));
    sub_verify->add_option("--dkappa", verify_o.dkappa, "diffusivity offset of the pair")
        ->check(CLI::Range(0.0, 1e9));
    sub_verify->add_option("--t-count", verify_o.t_count, "time grid size")
        ->check(CLI::Range(1, 1 << 20));
    sub_verify->add_option("--y-count", verify_o.y_count, "dyadic height count")
        ->check(CLI::Range(1, 40));

    auto add_scan_opts = [](CLI::App* sub, ScanOpts& o) {
        sub->add_option("--kappa", o.kappa, "diffusivity")->check(CLI::Range(0.0, 1e9));
        sub->add_option("--beta", o.beta, "threshold exponent")
            ->check(CLI::Range(1e-9, 1.0 - 1e-9));
        sub->add_option("--n", o.n, "box level")->check(CLI::Range(1, 12));
        sub->add_option("--samples", o.samples, "Monte Carlo sample count")
            ->check(CLI::Range(std::int64_t{2}, std::int64_t{100000000}));
        sub->add_flag("--quick", o.quick, "reduced sample count for smoke runs");
        sub->add_option("--j-list", o.j_list, "time indices j, in box units")
            ->delimiter(',')
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    };
    auto* sub_moment =
        app.add_subcommand("moment-scan", "derivative moment decay across corner points");
    add_scan_opts(sub_moment, moment_o);
    auto* sub_tail =
        app.add_subcommand("tail-scan", "derivative tail frequencies across corner points");
    add_scan_opts(sub_tail, tail_o);

    auto* sub_cont =
        app.add_subcommand("continuity-scan", "trace distance under diffusivity changes");
    sub_cont->add_option("--kappa", cont_o.kappa, "base diffusivity")
        ->check(CLI::Range(0.0, 1e9));
    sub_cont->add_option("--dkappa", cont_o.dkappas, "diffusivity offsets")
        ->delimiter(',')
        ->multi_option_policy(list_policy)
        ->check(CLI::Range(0.0, 1e9));
    sub_cont->add_option("--t-count", cont_o.t_count, "trace grid size")
        ->check(CLI::Range(3, 1 << 20));

    auto* sub_whit =
        app.add_subcommand("whitney-scan", "box image diameters and their decay rate");
    sub_whit->add_option("--q", whit_o.q, "kappa-axis scaling exponent")
        ->check(CLI::Range(1e-6, 20.0));
    sub_whit->add_option("--kappa-lo", whit_o.kappa_lo, "lower end of the kappa window")
        ->check(CLI::Range(0.0, 1e9));
    sub_whit->add_option("--kappa-hi", whit_o.kappa_hi, "upper end of the kappa window")
        ->check(CLI::Range(0.0, 1e9));
    sub_whit->add_option("--n-lo", whit_o.n_lo, "first box level")->check(CLI::Range(1, 20));
    sub_whit->add_option("--n-hi", whit_o.n_hi, "last box level")->check(CLI::Range(1, 20));
    sub_whit->add_option("--boxes", whit_o.boxes, "random boxes per level")
        ->check(CLI::Range(0, 100000));
    sub_whit->add_option("--m", whit_o.m, "sub-grid points per box axis")
        ->check(CLI::Range(2, 64));

    // Assemble the final token stream: subcommand first, then config file
    // tokens, then the user's own tokens so flags override the file.
    std::vector<std::string> user;
    for (int i = 1; i < argc; ++i) user.emplace_back(argv[i]);

    std::string sub_name;
    {
        bool skip_value = false;
        for (const std::string& t : user) {
            if (skip_value) {
                skip_value = false;
                continue;
            }
            if (is_value_flag(t)) {
                skip_value = true;
                continue;
            }
            if (t.rfind("-", 0) == 0) continue;
            if (app.get_subcommand_no_throw(t) != nullptr) {
                sub_name = t;
                break;
            }
        }
    }

    std::string config_path;
    for (std::size_t i = 0; i < user.size(); ++i) {
        if (user[i] == "--config" && i + 1 < user.size()) config_path = user[i + 1];
        else if (user[i].rfind("--config=", 0) == 0) config_path = user[i].substr(9);
    }

    std::vector<std::string> final_args;
    if (!sub_name.empty() && !config_path.empty()) {
        std::vector<std::string> user_flags;
        for (const std::string& t : user) {
            if (t.rfind("--", 0) != 0) continue;
            const auto eq = t.find('=');
            user_flags.push_back(eq == std::string::npos ? t : t.substr(0, eq));
        }
        // --driver and --kappa are alternatives in trace: choosing one on the
        // command line suppresses the other coming from the file.
        if (sub_name == "trace") {
            const auto has = [&](const char* f) {
                return std::find(user_flags.begin(), user_flags.end(), f) != user_flags.end();
            };
            if (has("--driver")) user_flags.push_back("--kappa");
            if (has("--kappa")) user_flags.push_back("--driver");
        }
        int err = 0;
        auto toks = config_tokens(config_path, app, app.get_subcommand_no_throw(sub_name),
                                  user_flags, err);
        if (err != 0) return err;
        final_args.push_back(sub_name);
        final_args.insert(final_args.end(), toks.begin(), toks.end());
        bool dropped = false;
        for (const std::string& t : user) {
            if (!dropped && t == sub_name) {
                dropped = true;
                continue;
            }
            final_args.push_back(t);
        }
    } else {
        final_args = user;
    }

    try {
        std::reverse(final_args.begin(), final_args.end());
        app.parse(final_args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    g.level_set = level_opt->count() > 0;
    moment_o.samples_set = sub_moment->get_option("--samples")->count() > 0;
    tail_o.samples_set = sub_tail->get_option("--samples")->count() > 0;

    try {
        if (sub_trace->parsed()) return run_trace(g, trace_o);
        if (sub_exp->parsed()) return run_exponents(g, exp_kappas);
        if (sub_verify->parsed()) return run_verify_bounds(g, verify_o);
        if (sub_moment->parsed()) return run_scan(g, moment_o, false);
        if (sub_tail->parsed()) return run_scan(g, tail_o, true);
        if (sub_cont->parsed()) return run_continuity(g, cont_o);
        if (sub_whit->parsed()) return run_whitney(g, whit_o);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

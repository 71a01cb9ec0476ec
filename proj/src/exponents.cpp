#include "sle/exponents.hpp"

#include <cmath>
#include <functional>

namespace sle {

namespace {

constexpr double kBetaEdge = 1e-9;       // keep clear of the (1+beta)^-2 pole
constexpr int kScanPoints = 10000;
constexpr double kBisectTol = 1e-12;

double require_kappa_positive(double kappa, const char* who) {
    if (!(kappa > 0.0)) throw domain_error(std::string(who) + ": kappa must be positive");
    return kappa;
}

// Rightmost sign change of g on [lo, hi], refined by bisection.
RootScan scan_rightmost_root(const std::function<double(double)>& g, double lo, double hi) {
    RootScan out;
    const double step = (hi - lo) / static_cast<double>(kScanPoints);
    double a = 0.0, b = 0.0;
    double x_prev = lo;
    double g_prev = g(lo);
    for (int i = 1; i <= kScanPoints; ++i) {
        const double x = lo + static_cast<double>(i) * step;
        const double gx = g(x);
        if (std::isfinite(g_prev) && std::isfinite(gx) && g_prev * gx <= 0.0 && gx != g_prev) {
            a = x_prev;
            b = x;
            ++out.bracket_count;
        }
        x_prev = x;
        g_prev = gx;
    }
    if (out.bracket_count == 0) return out;
    double ga = g(a);
    while (b - a > kBisectTol) {
        const double mid = 0.5 * (a + b);
        const double gm = g(mid);
        if (gm == 0.0) {
            a = b = mid;
            break;
        }
        if (ga * gm < 0.0) {
            b = mid;
        } else {
            a = mid;
            ga = gm;
        }
    }
    const double root = 0.5 * (a + b);
    out.root = root;
    out.residual = std::abs(g(root));
    return out;
}

}  // namespace

ExponentParams exponent_params(double kappa, double beta) {
    require_kappa_positive(kappa, "exponent_params");
    if (!(beta > -1.0) || !(beta < 1.0))
        throw domain_error("exponent_params: beta must lie in (-1, 1)");
    ExponentParams p{};
    p.kappa = kappa;
    p.beta = beta;
    const double denom = 8.0 * (1.0 + beta) * (1.0 + beta);
    p.lambda = 1.0 + 2.0 / kappa + beta * (2.0 + beta) * kappa / denom;
    p.zeta = 2.0 / kappa - beta * beta * kappa / denom;
    p.rho = p.lambda * beta + p.zeta;
    p.sigma = std::min(p.lambda * beta, p.rho - 2.0);
    p.phi = phi_of_beta(beta);
    return p;
}

double phi_of_beta(double beta) {
    if (!(beta >= -1.0) || !(beta <= 1.0))
        throw domain_error("phi_of_beta: beta must lie in [-1, 1]");
    return std::sqrt((1.0 + beta) / 2.0);
}

KappaConstants kappa_constants() {
    const double r = std::sqrt(3.0);
    return {8.0 * (2.0 - r), 8.0 * (2.0 + r)};
}

RootScan beta_hat_scan(double kappa) {
    if (kappa < 0.0) throw domain_error("beta_hat: kappa must be nonnegative");
    if (kappa == 0.0) return {0.0, 0, 0.0};
    return scan_rightmost_root(
        [kappa](double beta) {
            return exponent_params(kappa, beta).sigma - phi_of_beta(beta);
        },
        kBetaEdge, 1.0 - kBetaEdge);
}

std::optional<double> beta_hat(double kappa) { return beta_hat_scan(kappa).root; }

RootScan beta_kappa_scan(double kappa) {
    if (kappa < 0.0) throw domain_error("beta_kappa: kappa must be nonnegative");
    if (kappa == 0.0) return {-1.0, 0, 0.0};
    return scan_rightmost_root(
        [kappa](double beta) {
            return exponent_params(kappa, beta).rho - 2.0 - phi_of_beta(beta);
        },
        -1.0 + kBetaEdge, 1.0 - kBetaEdge);
}

std::optional<double> beta_kappa(double kappa) { return beta_kappa_scan(kappa).root; }

double beta_prime(double kappa) {
    if (kappa < 0.0) throw domain_error("beta_prime: kappa must be nonnegative");
    return (-16.0 + kappa * (8.0 + std::sqrt(468.0 + 30.0 * kappa))) /
           (16.0 + 14.0 * kappa + kappa * kappa);
}

double alpha_lower(double kappa) { return 0.5 * (1.0 - beta_prime(kappa)); }

double eta_lower(double kappa) {
    const double b = beta_prime(kappa);
    if (b > 1.0) throw domain_error("eta_lower: kappa beyond kappa0");
    const double num = 1.0 - b;
    return num / (num + phi_of_beta(b));
}

RootScan alpha_numeric_scan(double kappa) {
    if (kappa < 0.0) throw domain_error("alpha_numeric: kappa must be nonnegative");
    if (kappa == 0.0) return {1.0, 0, 0.0};
    RootScan scan = scan_rightmost_root(
        [kappa](double beta) {
            return exponent_params(kappa, beta).rho - 2.0 - phi_of_beta(beta) - (1.0 - beta);
        },
        -1.0 + kBetaEdge, 1.0 - kBetaEdge);
    if (scan.root) scan.root = 0.5 * (1.0 - *scan.root);
    return scan;
}

std::optional<double> alpha_numeric(double kappa) { return alpha_numeric_scan(kappa).root; }

double delta_exponent(double beta, double q) {
    return std::min(q - phi_of_beta(beta), 1.0 - beta);
}

EtaProfile eta_q_profile(double kappa, double beta) {
    const ExponentParams p = exponent_params(kappa, beta);
    const double q_hi = p.rho - 2.0;
    if (!(q_hi > p.phi))
        throw domain_error("eta_q_profile: no admissible q, rho - 2 <= phi(beta)");
    const double q_star = 1.0 - beta + p.phi;
    if (q_star <= q_hi) return {q_star, (1.0 - beta) / q_star};
    return {q_hi, (q_hi - p.phi) / q_hi};
}

}  // namespace sle

#pragma once

// Derivative-moment exponents and the exponent relations used by the decay
// and continuity diagnostics.  For kappa > 0 and beta in (-1, 1):
//     lambda = 1 + 2/kappa + beta(2+beta)kappa / (8(1+beta)^2)
//     zeta   = 2/kappa - beta^2 kappa / (8(1+beta)^2)
//     rho    = lambda*beta + zeta
//     sigma  = min(lambda*beta, rho - 2)
//     phi    = sqrt((1+beta)/2)
// kappa == 0 endpoints are handled by limits, never by evaluating 2/kappa.

#include <cstdint>
#include <optional>

#include "sle/common.hpp"

namespace sle {

struct ExponentParams {
    double kappa;
    double beta;
    double lambda;
    double zeta;
    double rho;
    double sigma;
    double phi;
};

ExponentParams exponent_params(double kappa, double beta);
double phi_of_beta(double beta);

// kappa0 = 8(2 - sqrt 3), kappa_inf = 8(2 + sqrt 3); kappa0 * kappa_inf = 64.
struct KappaConstants {
    double kappa0;
    double kappa_inf;
};
KappaConstants kappa_constants();

// Bracketed-bisection root search on a uniform beta grid; the rightmost
// sign-change bracket is refined.  bracket_count lets callers spot grids
// where the scan found something unexpected.
struct RootScan {
    std::optional<double> root;
    int bracket_count = 0;
    double residual = 0.0;
};

// Solution of phi(beta) = sigma(kappa, beta) on (0, 1); exists exactly for
// kappa in [0, kappa0) or (kappa_inf, inf).  beta_hat(0) = 0 by limit.
RootScan beta_hat_scan(double kappa);
std::optional<double> beta_hat(double kappa);

// Larger solution of phi(beta) = rho(kappa, beta) - 2 on (-1, 1); may be
// negative.  beta_kappa(0) = -1 by limit.
RootScan beta_kappa_scan(double kappa);
std::optional<double> beta_kappa(double kappa);

// Closed form (-16 + kappa(8 + sqrt(468 + 30 kappa))) / (16 + 14 kappa + kappa^2),
// the larger root after replacing phi by its tangent majorant beta/4 + 3/4.
// beta_prime(0) = -1, beta_prime(kappa0) = 1.
double beta_prime(double kappa);

// Holder-exponent bounds on [0, kappa0]: alpha_lower = (1 - beta')/2,
// eta_lower = (1 - beta') / (1 - beta' + phi(beta')).  Both are 1 at kappa=0
// and 0 at kappa0.
double alpha_lower(double kappa);
double eta_lower(double kappa);

// Larger solution of 1 - beta = rho(kappa, beta) - 2 - phi(beta), mapped to
// alpha = (1 - beta)/2.  Always >= alpha_lower since beta' majorizes the root.
RootScan alpha_numeric_scan(double kappa);
std::optional<double> alpha_numeric(double kappa);

// delta = min(q - phi(beta), 1 - beta); nonpositive values flag an
// inadmissible q.
double delta_exponent(double beta, double q);

// Maximizer of delta/q over q in (phi(beta), rho - 2].  The unconstrained
// optimum sits at q* = 1 - beta + phi(beta); when that exceeds rho - 2 the
// endpoint q = rho - 2 binds.
struct EtaProfile {
    double q_star;
    double value;
};
EtaProfile eta_q_profile(double kappa, double beta);

}  // namespace sle

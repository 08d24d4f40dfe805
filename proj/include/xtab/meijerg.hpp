#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace xtab {

// Order indices and real parameter vectors of a Meijer G-function
// G^{m,n}_{p,q}(a_1..a_p; b_1..b_q | z). Restricted to the classes where
// Slater's theorem applies: m >= 1, n <= p <= q, all poles of the integrand
// simple. Colliding-pole parameter sets are rejected at validation.
struct MeijerGSpec {
    std::size_t m = 0, n = 0, p = 0, q = 0;
    std::vector<double> a;
    std::vector<double> b;
};

// Throws NumericError when the spec is outside the supported class or its
// parameters collide poles.
void validate_meijer_spec(const MeijerGSpec& spec);

// Evaluates by the Slater expansion: a residue term per pole row of the first
// m gamma factors, each a gamma prefactor times a generalized hypergeometric
// series summed to a 1e-12 relative tail or 500 terms. Requires z > 0, and
// z < 1 when p == q (series convergence region).
double meijer_g_eval(const MeijerGSpec& spec, double z);

struct MeijerGGradient {
    std::vector<double> wrt_a;
    std::vector<double> wrt_b;
    std::vector<std::string> flags; // parameters that fell back to one-sided differences
};

// Central finite differences over (a, b) with step 1e-5 * max(1, |theta|);
// probes that leave the validity region degrade to one-sided differences.
MeijerGGradient meijer_g_grad(const MeijerGSpec& spec, double z);

// Generalized hypergeometric series sum_k prod(alpha+k) / prod(beta+k) x^k/k!,
// the computational kernel of the Slater expansion. Exposed for tests.
double hypergeometric_series(const std::vector<double>& alpha, const std::vector<double>& beta,
                             double x);

} // namespace xtab

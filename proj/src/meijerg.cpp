#include "xtab/meijerg.hpp"

#include <cmath>

#include "xtab/errors.hpp"

namespace xtab {

namespace {

constexpr double kRelTol = 1e-12;
constexpr int kMaxTerms = 500;

bool is_nonpositive_integer(double x) {
    return x < 0.5 && std::fabs(x - std::round(x)) < 1e-9;
}

// Gamma sign: positive on (0,inf), alternating on the negative unit intervals.
int gamma_sign(double x) {
    if (x > 0.0) return 1;
    const long long fl = static_cast<long long>(std::floor(x));
    return (fl % 2 == 0) ? 1 : -1;
}

// Product of gamma factors tracked in log-magnitude + sign form. A pole in a
// denominator factor annihilates the whole product (reciprocal gamma is zero).
struct GammaProduct {
    double log_abs = 0.0;
    int sign = 1;
    bool zero = false;

    void mul_gamma(double x) {
        log_abs += std::lgamma(x);
        sign *= gamma_sign(x);
    }
    void div_gamma(double x) {
        if (is_nonpositive_integer(x)) {
            zero = true;
            return;
        }
        log_abs -= std::lgamma(x);
        sign *= gamma_sign(x);
    }
};

} // namespace

double hypergeometric_series(const std::vector<double>& alpha, const std::vector<double>& beta,
                             double x) {
    double term = 1.0;
    double sum = 1.0;
    int small_streak = 0;
    for (int k = 0; k < kMaxTerms; ++k) {
        double ratio = x / static_cast<double>(k + 1);
        for (double aj : alpha) ratio *= aj + static_cast<double>(k);
        for (double bj : beta) ratio /= bj + static_cast<double>(k);
        term *= ratio;
        if (term == 0.0) return sum; // a numerator parameter hit zero: polynomial case
        sum += term;
        if (!std::isfinite(sum)) throw NumericError("meijer-g: hypergeometric series overflow");
        // two consecutive small terms guard against alternating-series stalls
        small_streak = std::fabs(term) <= kRelTol * std::fabs(sum) ? small_streak + 1 : 0;
        if (small_streak >= 2) return sum;
    }
    throw NumericError("meijer-g: series did not converge within " + std::to_string(kMaxTerms) +
                       " terms");
}

void validate_meijer_spec(const MeijerGSpec& spec) {
    if (spec.a.size() != spec.p || spec.b.size() != spec.q)
        throw NumericError("meijer-g: parameter vector lengths must match p and q");
    if (spec.m < 1 || spec.m > spec.q || spec.n > spec.p)
        throw NumericError("meijer-g: order indices must satisfy 1 <= m <= q, n <= p");
    if (spec.p > spec.q)
        throw NumericError("meijer-g: unsupported class p > q (series expansion needs p <= q)");
    for (std::size_t h = 0; h < spec.m; ++h) {
        for (std::size_t j = 0; j < spec.m; ++j) {
            if (j == h) continue;
            if (is_nonpositive_integer(spec.b[j] - spec.b[h]))
                throw NumericError("meijer-g: pole collision, b[" + std::to_string(j) + "] - b[" +
                                   std::to_string(h) + "] is a non-positive integer");
        }
        for (std::size_t j = 0; j < spec.n; ++j) {
            if (is_nonpositive_integer(1.0 + spec.b[h] - spec.a[j]))
                throw NumericError("meijer-g: pole collision, a[" + std::to_string(j) + "] - b[" +
                                   std::to_string(h) + "] is a positive integer");
        }
        // b parameters across the m boundary: an integer gap of the wrong sign
        // lands a series denominator parameter on a non-positive integer (the
        // logarithmic limit case, outside the supported class).
        for (std::size_t j = spec.m; j < spec.q; ++j) {
            if (is_nonpositive_integer(1.0 + spec.b[h] - spec.b[j]))
                throw NumericError("meijer-g: pole collision, b[" + std::to_string(j) + "] - b[" +
                                   std::to_string(h) + "] is a positive integer");
        }
    }
}

double meijer_g_eval(const MeijerGSpec& spec, double z) {
    validate_meijer_spec(spec);
    if (!(z > 0.0)) throw NumericError("meijer-g: evaluation requires z > 0");
    if (spec.p == spec.q && !(z < 1.0))
        throw NumericError("meijer-g: z outside convergence region (p == q needs z < 1)");

    // Parity of p-m-n decides the series argument sign.
    const double x = ((spec.p + spec.m + spec.n) % 2 == 0) ? z : -z;

    double value = 0.0;
    for (std::size_t h = 0; h < spec.m; ++h) {
        GammaProduct prod;
        for (std::size_t j = 0; j < spec.m; ++j)
            if (j != h) prod.mul_gamma(spec.b[j] - spec.b[h]);
        for (std::size_t j = 0; j < spec.n; ++j) prod.mul_gamma(1.0 + spec.b[h] - spec.a[j]);
        for (std::size_t j = spec.m; j < spec.q; ++j) prod.div_gamma(1.0 + spec.b[h] - spec.b[j]);
        for (std::size_t j = spec.n; j < spec.p; ++j) prod.div_gamma(spec.a[j] - spec.b[h]);
        if (prod.zero) continue;

        std::vector<double> alpha;
        alpha.reserve(spec.p);
        for (std::size_t j = 0; j < spec.p; ++j) alpha.push_back(1.0 + spec.b[h] - spec.a[j]);
        std::vector<double> beta;
        beta.reserve(spec.q - 1);
        for (std::size_t j = 0; j < spec.q; ++j)
            if (j != h) beta.push_back(1.0 + spec.b[h] - spec.b[j]);

        const double series = hypergeometric_series(alpha, beta, x);
        value += static_cast<double>(prod.sign) *
                 std::exp(prod.log_abs + spec.b[h] * std::log(z)) * series;
    }
    if (!std::isfinite(value)) throw NumericError("meijer-g: evaluation overflowed");
    return value;
}

namespace {

bool try_eval(const MeijerGSpec& spec, double z, double& out) {
    try {
        out = meijer_g_eval(spec, z);
        return true;
    } catch (const NumericError&) {
        return false;
    }
}

} // namespace

MeijerGGradient meijer_g_grad(const MeijerGSpec& spec, double z) {
    const double base = meijer_g_eval(spec, z); // also validates
    MeijerGGradient grad;
    grad.wrt_a.resize(spec.p);
    grad.wrt_b.resize(spec.q);

    auto differentiate = [&](bool is_a, std::size_t idx) {
        MeijerGSpec probe = spec;
        double& theta = is_a ? probe.a[idx] : probe.b[idx];
        const double center = theta;
        const double h = 1e-5 * std::max(1.0, std::fabs(center));
        const std::string name = (is_a ? "a[" : "b[") + std::to_string(idx) + "]";

        theta = center + h;
        double up = 0.0;
        const bool have_up = try_eval(probe, z, up);
        theta = center - h;
        double down = 0.0;
        const bool have_down = try_eval(probe, z, down);

        if (have_up && have_down) return (up - down) / (2.0 * h);
        if (have_up) {
            grad.flags.push_back(name + ": one-sided difference (lower probe invalid)");
            return (up - base) / h;
        }
        if (have_down) {
            grad.flags.push_back(name + ": one-sided difference (upper probe invalid)");
            return (base - down) / h;
        }
        throw NumericError("meijer-g: both gradient probes for " + name + " are invalid");
    };

    for (std::size_t j = 0; j < spec.p; ++j) grad.wrt_a[j] = differentiate(true, j);
    for (std::size_t j = 0; j < spec.q; ++j) grad.wrt_b[j] = differentiate(false, j);
    return grad;
}

} // namespace xtab

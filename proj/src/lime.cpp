#include "xtab/lime.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "xtab/errors.hpp"
#include "xtab/rng.hpp"

namespace xtab {

TrainStats TrainStats::from_table(const FeatureTable& table) {
    TrainStats s;
    const std::size_t d = table.cols();
    s.mean.resize(d);
    s.stddev.resize(d);
    s.is_binary.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
        s.is_binary[c] = table.column_kinds[c] == ColumnKind::binary ? 1 : 0;
        double sum = 0.0, sum_sq = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < table.rows; ++r) {
            if (table.is_missing(r, c)) continue;
            sum += table.at(r, c);
            sum_sq += table.at(r, c) * table.at(r, c);
            ++n;
        }
        if (n == 0) continue;
        s.mean[c] = sum / static_cast<double>(n);
        const double var = sum_sq / static_cast<double>(n) - s.mean[c] * s.mean[c];
        s.stddev[c] = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return s;
}

std::string LimeExplanation::to_json() const {
    nlohmann::json j;
    j["intercept"] = intercept;
    j["coefficients"] = coefficients;
    j["kernel_width"] = kernel_width;
    j["surrogate_r2"] = surrogate_r2;
    j["samples"] = samples;
    j["seed"] = seed;
    j["instance"] = instance;
    if (!notes.empty()) j["notes"] = notes;
    return j.dump(2);
}

std::vector<std::vector<double>> perturb(const std::vector<double>& instance,
                                         const TrainStats& stats, std::size_t n,
                                         std::uint64_t seed) {
    if (n < 1) throw ConfigError("perturb needs n >= 1");
    const std::size_t d = instance.size();
    if (stats.mean.size() != d || stats.stddev.size() != d || stats.is_binary.size() != d)
        throw DataError("perturb: train stats do not cover every feature");

    std::vector<std::vector<double>> out;
    out.reserve(n);
    out.push_back(instance); // row 0 convention
    Rng rng(seed);
    for (std::size_t s = 1; s < n; ++s) {
        std::vector<double> row(d);
        for (std::size_t c = 0; c < d; ++c) {
            if (stats.is_binary[c]) {
                row[c] = rng.bernoulli(0.25) ? 1.0 - instance[c] : instance[c];
            } else if (stats.stddev[c] <= 0.0) {
                row[c] = instance[c]; // degenerate law, held fixed
            } else {
                row[c] = std::clamp(rng.normal(instance[c], stats.stddev[c]), 0.0, 1.0);
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

double proximity_weight(const std::vector<double>& a, const std::vector<double>& b, double width) {
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dist_sq += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-dist_sq / (width * width));
}

double default_kernel_width(std::size_t d) {
    return 0.75 * std::sqrt(static_cast<double>(d));
}

namespace {

// Cholesky solve of A x = b for a symmetric positive definite A (in place).
// Returns false when a pivot collapses.
bool cholesky_solve(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            double s = a[i][k];
            for (std::size_t m = 0; m < k; ++m) s -= a[i][m] * a[k][m];
            a[i][k] = s / a[k][k];
        }
        const double full = a[i][i];
        double diag = full;
        for (std::size_t m = 0; m < i; ++m) diag -= a[i][m] * a[i][m];
        // relative pivot test: cancellation to roundoff level means rank deficiency
        if (diag <= 1e-10 * std::max(1.0, full)) return false;
        a[i][i] = std::sqrt(diag);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t m = 0; m < i; ++m) s -= a[i][m] * b[m];
        b[i] = s / a[i][i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t m = ii + 1; m < n; ++m) s -= a[m][ii] * b[m];
        b[ii] = s / a[ii][ii];
    }
    return true;
}

} // namespace

LimeExplanation lime_explain(const ScoreFn& model, const std::vector<double>& instance,
                             const TrainStats& stats, std::size_t n, double kernel_width,
                             std::uint64_t seed) {
    const std::size_t d = instance.size();
    if (n < d + 1)
        throw ConfigError("lime needs at least d+1 samples (" + std::to_string(d + 1) + ")");
    if (kernel_width <= 0.0) kernel_width = default_kernel_width(d);

    const auto samples = perturb(instance, stats, n, seed);
    std::vector<double> target(n), weight(n);
    for (std::size_t s = 0; s < n; ++s) {
        target[s] = model(samples[s]);
        weight[s] = proximity_weight(samples[s], instance, kernel_width);
    }

    // Weighted normal equations over the design [1, x_1..x_d].
    const std::size_t p = d + 1;
    std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
    std::vector<double> xty(p, 0.0);
    std::vector<double> row(p);
    for (std::size_t s = 0; s < n; ++s) {
        row[0] = 1.0;
        for (std::size_t c = 0; c < d; ++c) row[c + 1] = samples[s][c];
        for (std::size_t i = 0; i < p; ++i) {
            xty[i] += weight[s] * row[i] * target[s];
            for (std::size_t k = 0; k <= i; ++k) xtx[i][k] += weight[s] * row[i] * row[k];
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t k = i + 1; k < p; ++k) xtx[i][k] = xtx[k][i];

    LimeExplanation out;
    out.kernel_width = kernel_width;
    out.samples = n;
    out.seed = seed;
    out.instance = instance;

    auto a = xtx;
    auto b = xty;
    if (!cholesky_solve(a, b)) {
        // rank-deficient design
        a = xtx;
        b = xty;
        for (std::size_t i = 0; i < p; ++i) a[i][i] += 1e-6;
        out.notes.push_back("rank-deficient design; ridge fallback with penalty 1e-6");
        if (!cholesky_solve(a, b)) throw NumericError("lime: normal equations unsolvable");
    }
    out.intercept = b[0];
    out.coefficients.assign(b.begin() + 1, b.end());

    double ss_res = 0.0, ss_tot = 0.0, wsum = 0.0, wmean = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        wmean += weight[s] * target[s];
        wsum += weight[s];
    }
    wmean /= wsum;
    for (std::size_t s = 0; s < n; ++s) {
        double pred = out.intercept;
        for (std::size_t c = 0; c < d; ++c) pred += out.coefficients[c] * samples[s][c];
        ss_res += weight[s] * (target[s] - pred) * (target[s] - pred);
        ss_tot += weight[s] * (target[s] - wmean) * (target[s] - wmean);
    }
    out.surrogate_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

} // namespace xtab

#include "xtab/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "xtab/errors.hpp"
#include "xtab/rng.hpp"

namespace xtab {

double ShapExplanation::reconstructed_score() const {
    return base_value + std::accumulate(attributions.begin(), attributions.end(), 0.0);
}

std::string ShapExplanation::to_json() const {
    nlohmann::json j;
    j["base_value"] = base_value;
    j["attributions"] = attributions;
    if (!standard_errors.empty()) j["standard_errors"] = standard_errors;
    j["instance"] = instance;
    j["method"] = method;
    j["samples_used"] = samples_used;
    return j.dump(2);
}

std::string ShapSummary::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows)
        j.push_back({{"feature", r.feature},
                     {"mean_abs_attribution", r.mean_abs_attribution},
                     {"sign_association", r.sign_association}});
    return j.dump(2);
}

namespace {

void check_widths(const std::vector<double>& instance,
                  const std::vector<std::vector<double>>& background) {
    if (background.empty()) throw DataError("shap: background sample is empty");
    for (const auto& row : background)
        if (row.size() != instance.size())
            throw DataError("shap: background row width does not match the instance");
}

// Mean model score with coalition features taken from the instance and the
// rest from each background row in turn.
double value_of_coalition(const ScoreFn& model, const std::vector<double>& instance,
                          const std::vector<std::vector<double>>& background,
                          std::uint32_t coalition_bits) {
    const std::size_t d = instance.size();
    std::vector<double> composite(d);
    double total = 0.0;
    for (const auto& bg : background) {
        for (std::size_t i = 0; i < d; ++i)
            composite[i] = (coalition_bits >> i) & 1u ? instance[i] : bg[i];
        total += model(composite);
    }
    return total / static_cast<double>(background.size());
}

} // namespace

ShapExplanation shap_exact(const ScoreFn& model, const std::vector<double>& instance,
                           const std::vector<std::vector<double>>& background) {
    const std::size_t d = instance.size();
    if (d > kShapExactLimit)
        throw ConfigError("shap_exact supports at most " + std::to_string(kShapExactLimit) +
                          " features (" + std::to_string(d) + " given); use shap_sampled");
    check_widths(instance, background);

    // Exact factorials up to 15! fit a double without rounding.
    std::vector<double> factorial(d + 1, 1.0);
    for (std::size_t i = 1; i <= d; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);

    const std::uint32_t n_sets = 1u << d;
    std::vector<double> v(n_sets);
    for (std::uint32_t s = 0; s < n_sets; ++s)
        v[s] = value_of_coalition(model, instance, background, s);

    ShapExplanation out;
    out.instance = instance;
    out.method = "exact";
    out.samples_used = static_cast<std::size_t>(n_sets) * background.size();
    out.base_value = v[0];
    out.attributions.assign(d, 0.0);
    // Weighted marginals are summed in sorted order so that exchangeable
    // features (identical term multisets) come out exactly equal.
    std::vector<std::vector<double>> terms(d);
    for (auto& t : terms) t.reserve(n_sets / 2);
    for (std::uint32_t s = 0; s < n_sets; ++s) {
        const int size_s = std::popcount(s);
        for (std::size_t i = 0; i < d; ++i) {
            if ((s >> i) & 1u) continue;
            const double w = factorial[static_cast<std::size_t>(size_s)] *
                             factorial[d - static_cast<std::size_t>(size_s) - 1] / factorial[d];
            terms[i].push_back(w * (v[s | (1u << i)] - v[s]));
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        std::sort(terms[i].begin(), terms[i].end());
        for (double t : terms[i]) out.attributions[i] += t;
    }
    return out;
}

ShapExplanation shap_sampled(const ScoreFn& model, const std::vector<double>& instance,
                             const std::vector<std::vector<double>>& background,
                             std::size_t permutations, std::uint64_t seed) {
    if (permutations < 1) throw ConfigError("shap_sampled needs at least one permutation");
    check_widths(instance, background);
    const std::size_t d = instance.size();

    std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
    std::vector<std::size_t> order(d);
    Rng rng(seed);

    const double base = value_of_coalition(model, instance, background, 0);
    for (std::size_t p = 0; p < permutations; ++p) {
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        std::uint32_t bits = 0;
        double prev = base;
        for (std::size_t k = 0; k < d; ++k) {
            bits |= 1u << order[k];
            const double cur = value_of_coalition(model, instance, background, bits);
            const double marginal = cur - prev;
            sum[order[k]] += marginal;
            sum_sq[order[k]] += marginal * marginal;
            prev = cur;
        }
    }

    ShapExplanation out;
    out.instance = instance;
    out.method = "sampled";
    out.samples_used = permutations;
    out.base_value = base;
    out.attributions.resize(d);
    out.standard_errors.resize(d);
    const double n = static_cast<double>(permutations);
    for (std::size_t i = 0; i < d; ++i) {
        out.attributions[i] = sum[i] / n;
        const double var = permutations > 1
                               ? std::max(0.0, (sum_sq[i] - sum[i] * sum[i] / n) / (n - 1.0))
                               : 0.0;
        out.standard_errors[i] = std::sqrt(var / n);
    }
    return out;
}

ShapSummary shap_summary(const ScoreFn& model, const std::vector<std::vector<double>>& rows,
                         const std::vector<std::vector<double>>& background,
                         const std::vector<std::string>& feature_names,
                         const ShapSummaryConfig& config) {
    if (rows.empty()) throw DataError("shap_summary: no rows to explain");
    const std::size_t d = rows.front().size();
    if (feature_names.size() != d)
        throw DataError("shap_summary: feature name count does not match row width");
    const bool exact = !config.force_sampled && d <= kShapExactLimit;

    std::vector<std::vector<double>> phi(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ShapExplanation e = exact ? shap_exact(model, rows[r], background)
                                  : shap_sampled(model, rows[r], background, config.permutations,
                                                 mix_seed(config.seed, r));
        phi[r] = std::move(e.attributions);
    }

    ShapSummary summary;
    for (std::size_t i = 0; i < d; ++i) {
        ShapSummary::Row row;
        row.feature = feature_names[i];
        double sum_abs = 0.0;
        double sa = 0.0, sv = 0.0, saa = 0.0, svv = 0.0, sav = 0.0;
        const double n = static_cast<double>(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const double a = phi[r][i];
            const double x = rows[r][i];
            sum_abs += std::fabs(a);
            sa += a;
            sv += x;
            saa += a * a;
            svv += x * x;
            sav += a * x;
        }
        row.mean_abs_attribution = sum_abs / n;
        const double va = saa - sa * sa / n;
        const double vv = svv - sv * sv / n;
        row.sign_association = (va > 0.0 && vv > 0.0)
                                   ? (sav - sa * sv / n) / std::sqrt(va * vv)
                                   : 0.0;
        summary.rows.push_back(std::move(row));
    }
    std::sort(summary.rows.begin(), summary.rows.end(), [](const auto& a, const auto& b) {
        if (a.mean_abs_attribution != b.mean_abs_attribution)
            return a.mean_abs_attribution > b.mean_abs_attribution;
        return a.feature < b.feature;
    });
    return summary;
}

} // namespace xtab

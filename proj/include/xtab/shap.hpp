#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xtab/ensemble.hpp"

namespace xtab {

// Instance-level Shapley attribution of a score function. base_value is the
// mean score over the background sample; base_value + sum(attributions)
// equals the score of the explained instance (exactly for the enumerating
// method, within sampling error otherwise).
struct ShapExplanation {
    double base_value = 0.0;
    std::vector<double> attributions;
    std::vector<double> standard_errors; // sampled method only; empty for exact
    std::vector<double> instance;
    std::string method; // "exact" | "sampled"
    std::size_t samples_used = 0;

    double reconstructed_score() const;
    std::string to_json() const;
};

// Global aggregation of per-instance attributions.
struct ShapSummary {
    struct Row {
        std::string feature;
        double mean_abs_attribution = 0.0;
        double sign_association = 0.0; // corr(attribution, feature value)
    };
    std::vector<Row> rows; // descending by mean_abs_attribution, ties by name

    std::string to_json() const;
};

// Largest feature count the enumerating method accepts (2^d value-function
// evaluations, each averaged over the background).
constexpr std::size_t kShapExactLimit = 15;

// Exact Shapley values by coalition enumeration over all 2^d subsets, with the
// interventional value function: features outside the coalition are replaced
// by background-row values and the scores averaged.
ShapExplanation shap_exact(const ScoreFn& model, const std::vector<double>& instance,
                           const std::vector<std::vector<double>>& background);

// Permutation-sampling estimator of the same quantity with per-feature
// standard errors; deterministic per seed.
ShapExplanation shap_sampled(const ScoreFn& model, const std::vector<double>& instance,
                             const std::vector<std::vector<double>>& background,
                             std::size_t permutations, std::uint64_t seed);

struct ShapSummaryConfig {
    bool force_sampled = false;
    std::size_t permutations = 128;
    std::uint64_t seed = 0;
};

// Explains every row (exact when width permits, sampled otherwise) and
// aggregates mean |attribution| and the attribution/value correlation.
ShapSummary shap_summary(const ScoreFn& model, const std::vector<std::vector<double>>& rows,
                         const std::vector<std::vector<double>>& background,
                         const std::vector<std::string>& feature_names,
                         const ShapSummaryConfig& config = {});

} // namespace xtab

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xtab/table.hpp"

namespace xtab {

// Synthetic cohort with planted ground truth: known informative features, an
// optional multiplicative interaction, noisy duplicate columns and per-column
// missingness, so every pipeline stage has an oracle to check against.
struct SynthConfig {
    std::size_t rows = 392;
    std::size_t features = 20;
    std::vector<std::pair<std::size_t, double>> informative; // (index, coefficient)
    struct Interaction {
        std::size_t i = 0, j = 0;
        double coefficient = 0.0;
    };
    std::optional<Interaction> interaction_pair;
    struct Duplicate {
        std::size_t source = 0, target = 0;
        double noise_std = 0.0;
    };
    std::vector<Duplicate> duplicate_pairs;
    std::vector<double> missing_rate; // per column; empty = fully observed
    double intercept = 0.0;
    std::uint64_t seed = 0;

    // Paper-shaped default: 392 rows, 20 features, 5 informative, one strong
    // interaction, ~30% positive rate.
    static SynthConfig default_cohort(std::uint64_t seed = 13);
};

struct SynthGroundTruth {
    std::vector<std::pair<std::size_t, double>> informative;
    std::optional<SynthConfig::Interaction> interaction_pair;
    std::vector<SynthConfig::Duplicate> duplicate_pairs;
    double intercept = 0.0;
    std::vector<std::size_t> rows_with_missing;
    std::vector<double> true_score; // sigmoid of the planted linear+interaction score

    std::string to_json() const;
};

// Features uniform on [0,1], labels Bernoulli(sigmoid(planted score)),
// deterministic per seed. Column names X0..X<d-1>, outcome attached.
std::pair<FeatureTable, SynthGroundTruth> generate(const SynthConfig& config);

// Schema matching the generated table plus the outcome column name.
Schema synth_schema(const SynthConfig& config, const std::string& outcome_name);

} // namespace xtab

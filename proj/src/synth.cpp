#include "xtab/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "xtab/ensemble.hpp"
#include "xtab/errors.hpp"
#include "xtab/rng.hpp"

namespace xtab {

SynthConfig SynthConfig::default_cohort(std::uint64_t seed) {
    SynthConfig c;
    c.rows = 392;
    c.features = 20;
    c.informative = {{0, 3.5}, {3, -3.0}, {7, 2.5}, {12, 2.0}, {18, -2.0}};
    c.interaction_pair = Interaction{0, 3, 5.0};
    c.intercept = -1.05;
    c.seed = seed;
    return c;
}

std::string SynthGroundTruth::to_json() const {
    nlohmann::json j;
    j["informative"] = nlohmann::json::array();
    for (const auto& [idx, coeff] : informative) j["informative"].push_back({idx, coeff});
    if (interaction_pair)
        j["interaction_pair"] = {interaction_pair->i, interaction_pair->j,
                                 interaction_pair->coefficient};
    j["duplicate_pairs"] = nlohmann::json::array();
    for (const auto& d : duplicate_pairs)
        j["duplicate_pairs"].push_back({d.source, d.target, d.noise_std});
    j["intercept"] = intercept;
    j["rows_with_missing"] = rows_with_missing;
    j["true_score"] = true_score;
    return j.dump(2);
}

std::pair<FeatureTable, SynthGroundTruth> generate(const SynthConfig& config) {
    if (config.rows < 1 || config.features < 1)
        throw ConfigError("synth: rows and features must be positive");
    if (config.informative.empty() && !config.interaction_pair)
        throw ConfigError("synth: degenerate config, no informative features and no interaction");
    for (const auto& [idx, coeff] : config.informative)
        if (idx >= config.features) throw ConfigError("synth: informative index out of range");
    if (config.interaction_pair &&
        (config.interaction_pair->i >= config.features ||
         config.interaction_pair->j >= config.features))
        throw ConfigError("synth: interaction index out of range");
    for (const auto& d : config.duplicate_pairs)
        if (d.source >= config.features || d.target >= config.features ||
            d.source == d.target)
            throw ConfigError("synth: bad duplicate pair");
    if (!config.missing_rate.empty() && config.missing_rate.size() != config.features)
        throw ConfigError("synth: missing_rate must cover every column");
    for (double r : config.missing_rate)
        if (r < 0.0 || r >= 1.0) throw ConfigError("synth: missing rate must lie in [0,1)");

    std::vector<std::string> names;
    std::vector<ColumnKind> kinds(config.features, ColumnKind::numeric);
    for (std::size_t c = 0; c < config.features; ++c) names.push_back("X" + std::to_string(c));
    FeatureTable t = FeatureTable::with_shape(std::move(names), std::move(kinds), config.rows);

    Rng features_rng(mix_seed(config.seed, 0));
    for (std::size_t r = 0; r < config.rows; ++r)
        for (std::size_t c = 0; c < config.features; ++c) {
            t.at(r, c) = features_rng.uniform01();
            t.missing_mask[r * config.features + c] = 0;
        }

    // Duplicates overwrite their target column with source + noise, clipped to [0,1].
    Rng dup_rng(mix_seed(config.seed, 1));
    for (const auto& d : config.duplicate_pairs)
        for (std::size_t r = 0; r < config.rows; ++r) {
            double v = t.at(r, d.source);
            if (d.noise_std > 0.0) v = std::clamp(v + dup_rng.normal(0.0, d.noise_std), 0.0, 1.0);
            t.at(r, d.target) = v;
        }

    SynthGroundTruth truth;
    truth.informative = config.informative;
    truth.interaction_pair = config.interaction_pair;
    truth.duplicate_pairs = config.duplicate_pairs;
    truth.intercept = config.intercept;
    truth.true_score.resize(config.rows);

    Rng label_rng(mix_seed(config.seed, 2));
    std::vector<std::uint8_t> outcome(config.rows);
    for (std::size_t r = 0; r < config.rows; ++r) {
        double score = config.intercept;
        for (const auto& [idx, coeff] : config.informative)
            score += coeff * (t.at(r, idx) - 0.5);
        if (config.interaction_pair)
            score += config.interaction_pair->coefficient *
                     (t.at(r, config.interaction_pair->i) - 0.5) *
                     (t.at(r, config.interaction_pair->j) - 0.5);
        truth.true_score[r] = sigmoid(score);
        outcome[r] = label_rng.bernoulli(truth.true_score[r]) ? 1 : 0;
    }
    t.outcome = std::move(outcome);

    if (!config.missing_rate.empty()) {
        Rng missing_rng(mix_seed(config.seed, 3));
        std::vector<bool> corrupted(config.rows, false);
        for (std::size_t r = 0; r < config.rows; ++r)
            for (std::size_t c = 0; c < config.features; ++c)
                if (missing_rng.bernoulli(config.missing_rate[c])) {
                    t.set_missing(r, c);
                    corrupted[r] = true;
                }
        for (std::size_t r = 0; r < config.rows; ++r)
            if (corrupted[r]) truth.rows_with_missing.push_back(r);
    }
    return {std::move(t), std::move(truth)};
}

Schema synth_schema(const SynthConfig& config, const std::string& outcome_name) {
    Schema schema;
    for (std::size_t c = 0; c < config.features; ++c)
        schema.emplace_back("X" + std::to_string(c), ColumnKind::numeric);
    if (!outcome_name.empty()) schema.emplace_back(outcome_name, ColumnKind::binary);
    return schema;
}

} // namespace xtab

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xtab/table.hpp"

namespace xtab {

// Binary outcome = OR of three binary columns (death / ICU / ventilation style).
struct SeverityRule {
    std::string died_column;
    std::string icu_column;
    std::string ventilation_column;
};

struct Split {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::uint64_t seed = 0;
    double train_fraction = 0.7;
};

// Per-column (min,max) of the affine [0,1] map; replays the transform on unseen data.
struct NormalizationRecord {
    std::map<std::string, std::pair<double, double>> ranges;
    std::vector<std::string> constant_columns; // mapped to all zeros, flagged
};

// Each categorical column in `columns` becomes one binary indicator per
// observed category, named `<col>=<category>`; missing stays missing across
// the whole indicator group.
FeatureTable one_hot_encode(const FeatureTable& table, const std::vector<std::string>& columns);

// Concatenates the labels of several categorical columns into one categorical
// column (labels joined with '|'); sources are removed.
FeatureTable merge_columns(const FeatureTable& table, const std::vector<std::string>& sources,
                           const std::string& new_name);

// Keeps the last row (file order) per key value; rows with a missing key pass through.
FeatureTable keep_last_by_key(const FeatureTable& table, const std::string& key_column);

// Sets outcome to the elementwise OR of the rule columns and removes them from
// the feature set. Missing values in a rule column are an error.
FeatureTable derive_severity(const FeatureTable& table, const SeverityRule& rule);

// Moves a binary column out of the feature set and into the outcome slot.
FeatureTable outcome_from_column(const FeatureTable& table, const std::string& column);

// (x-min)/(max-min) per numeric column; binary and categorical untouched.
// Constant numeric columns map to all zeros and are flagged in the record.
std::pair<FeatureTable, NormalizationRecord> normalize_unit_range(const FeatureTable& table);
FeatureTable apply_normalization(const FeatureTable& table, const NormalizationRecord& record);

FeatureTable drop_rows_with_missing(const FeatureTable& table);

// Shuffle-then-cut at round(fraction*n); deterministic per seed.
Split split_train_test(const FeatureTable& table, double fraction, std::uint64_t seed);

} // namespace xtab

#pragma once

#include <string>
#include <vector>

#include "xtab/table.hpp"

namespace xtab {

// Audit trail of one selection step: what was dropped, why, and the statistic
// that triggered it, plus scores over the surviving columns.
struct SelectionReport {
    struct Dropped {
        std::string column;
        std::string reason; // "missing_rate" | "low_variance" | "correlated_with:<col>" | "excluded"
        double statistic = 0.0;
    };
    std::vector<Dropped> dropped;
    std::vector<std::string> kept;
    std::vector<double> mi_scores;               // aligned to kept; empty if not computed
    std::vector<std::vector<double>> correlation; // over kept columns; empty if not computed
    std::vector<std::string> notes;

    std::string to_json() const;
    void write_correlation_csv(const std::string& path) const;
};

// Drops columns whose missing fraction strictly exceeds `threshold`.
std::pair<FeatureTable, SelectionReport> filter_missing_rate(const FeatureTable& table,
                                                             double threshold);

// Drops binary columns whose modal value frequency (over non-missing cells)
// is >= `dominance`.
std::pair<FeatureTable, SelectionReport> filter_low_variance(const FeatureTable& table,
                                                             double dominance);

// Plug-in empirical mutual information, in nats, of two discrete vectors.
double mutual_information(const std::vector<int>& x, const std::vector<int>& y);

// Equal-frequency binning of a numeric column (own bin per value when the
// number of distinct values is <= bins). Missing entries get bin -1.
std::vector<int> discretize_equal_frequency(const std::vector<double>& values,
                                            const std::vector<std::uint8_t>& missing, int bins);

// MI of one column against the outcome, over rows where both are observed.
double column_outcome_mi(const FeatureTable& table, std::size_t column, int bins = 10);

// Keeps the top_k columns by MI with the outcome (descending, ties by name).
std::pair<FeatureTable, SelectionReport> rank_by_mutual_information(const FeatureTable& table,
                                                                    std::size_t top_k,
                                                                    int bins = 10);

// Pearson correlation over rows where both columns are observed; zero-variance
// columns correlate as 0 (flagged).
double pearson(const FeatureTable& table, std::size_t a, std::size_t b);

// For each pair with |r| > threshold drops the member with the lower MI
// against the outcome (ties: drops the lexicographically later name).
std::pair<FeatureTable, SelectionReport> prune_correlated(const FeatureTable& table,
                                                          double threshold, int bins = 10);

// Drops the listed columns outright (config-driven exclusions).
std::pair<FeatureTable, SelectionReport> exclude_columns(const FeatureTable& table,
                                                         const std::vector<std::string>& names);

// Correlation matrix over all columns of the table (diagonal exactly 1).
std::vector<std::vector<double>> correlation_matrix(const FeatureTable& table);

} // namespace xtab

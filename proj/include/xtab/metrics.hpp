#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace xtab {

struct AucResult {
    double value = 0.0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::size_t tie_pairs = 0;
};

// Mann-Whitney AUC with half credit for tied scores, computed by a sorted scan
// in O(n log n). All pair counting is integer arithmetic, so the result is
// bit-identical to brute-force pairwise counting.
AucResult auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

struct ModelComparison {
    struct Entry {
        std::string name;
        AucResult auc;
    };
    std::vector<Entry> entries;
    struct Delta {
        std::string a, b;
        double value; // auc(a) - auc(b)
    };
    std::vector<Delta> deltas;

    std::string to_json() const;
};

ModelComparison compare_models(const std::vector<std::pair<std::string, std::vector<double>>>& entries,
                               const std::vector<std::uint8_t>& labels);

} // namespace xtab

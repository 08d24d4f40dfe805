#include "xtab/metrics.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "xtab/errors.hpp"

namespace xtab {

AucResult auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
    if (scores.size() != labels.size()) throw DataError("auc: scores/labels length mismatch");
    AucResult res;
    for (auto l : labels) (l ? res.positives : res.negatives)++;
    if (res.positives == 0 || res.negatives == 0)
        throw NumericError("AUC undefined: labels contain a single class");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });

    // Walk tie groups in ascending score order, counting positive-negative
    // pairs exactly: a positive beats every negative in strictly lower groups
    // and draws with negatives in its own group.
    unsigned long long concordant = 0, ties = 0;
    std::size_t neg_below = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t group_pos = 0, group_neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] ? group_pos : group_neg)++;
            ++j;
        }
        concordant += static_cast<unsigned long long>(group_pos) * neg_below;
        ties += static_cast<unsigned long long>(group_pos) * group_neg;
        neg_below += group_neg;
        i = j;
    }
    res.tie_pairs = static_cast<std::size_t>(ties);
    res.value = static_cast<double>(2 * concordant + ties) /
                (2.0 * static_cast<double>(res.positives) * static_cast<double>(res.negatives));
    return res;
}

ModelComparison compare_models(
    const std::vector<std::pair<std::string, std::vector<double>>>& entries,
    const std::vector<std::uint8_t>& labels) {
    ModelComparison cmp;
    for (const auto& [name, scores] : entries) cmp.entries.push_back({name, auc(scores, labels)});
    for (std::size_t a = 0; a < cmp.entries.size(); ++a)
        for (std::size_t b = a + 1; b < cmp.entries.size(); ++b)
            cmp.deltas.push_back({cmp.entries[a].name, cmp.entries[b].name,
                                  cmp.entries[a].auc.value - cmp.entries[b].auc.value});
    return cmp;
}

std::string ModelComparison::to_json() const {
    nlohmann::json j;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : entries)
        j["entries"].push_back({{"name", e.name},
                                {"auc", e.auc.value},
                                {"positives", e.auc.positives},
                                {"negatives", e.auc.negatives},
                                {"tie_pairs", e.auc.tie_pairs}});
    j["deltas"] = nlohmann::json::array();
    for (const auto& d : deltas) j["deltas"].push_back({{"a", d.a}, {"b", d.b}, {"delta", d.value}});
    return j.dump(2);
}

} // namespace xtab

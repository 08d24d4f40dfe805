#include "xtab/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "xtab/errors.hpp"
#include "xtab/rng.hpp"

namespace xtab {

FeatureTable one_hot_encode(const FeatureTable& table, const std::vector<std::string>& columns) {
    std::set<std::size_t> expand;
    for (const auto& name : columns) {
        std::size_t c = table.require_column(name);
        if (table.column_kinds[c] != ColumnKind::categorical)
            throw DataError("column '" + name + "' is not categorical");
        expand.insert(c);
    }

    FeatureTable out;
    out.rows = table.rows;
    out.outcome = table.outcome;
    std::vector<std::vector<double>> cols_values;
    std::vector<std::vector<std::uint8_t>> cols_missing;

    for (std::size_t c = 0; c < table.cols(); ++c) {
        if (!expand.count(c)) {
            out.column_names.push_back(table.column_names[c]);
            out.column_kinds.push_back(table.column_kinds[c]);
            out.categories.push_back(table.categories[c]);
            std::vector<double> v(table.rows);
            std::vector<std::uint8_t> m(table.rows);
            for (std::size_t r = 0; r < table.rows; ++r) {
                v[r] = table.at(r, c);
                m[r] = table.missing_mask[r * table.cols() + c];
            }
            cols_values.push_back(std::move(v));
            cols_missing.push_back(std::move(m));
            continue;
        }
        const auto& labels = table.categories[c];
        for (std::size_t k = 0; k < labels.size(); ++k) {
            out.column_names.push_back(table.column_names[c] + "=" + labels[k]);
            out.column_kinds.push_back(ColumnKind::binary);
            out.categories.emplace_back();
            std::vector<double> v(table.rows, 0.0);
            std::vector<std::uint8_t> m(table.rows, 0);
            for (std::size_t r = 0; r < table.rows; ++r) {
                if (table.is_missing(r, c)) {
                    m[r] = 1;
                    v[r] = std::numeric_limits<double>::quiet_NaN();
                } else {
                    v[r] = (static_cast<std::size_t>(table.at(r, c)) == k) ? 1.0 : 0.0;
                }
            }
            cols_values.push_back(std::move(v));
            cols_missing.push_back(std::move(m));
        }
    }

    const std::size_t w = out.column_names.size();
    out.values.resize(table.rows * w);
    out.missing_mask.resize(table.rows * w);
    for (std::size_t r = 0; r < table.rows; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            out.values[r * w + c] = cols_values[c][r];
            out.missing_mask[r * w + c] = cols_missing[c][r];
        }
    out.validate();
    return out;
}

FeatureTable merge_columns(const FeatureTable& table, const std::vector<std::string>& sources,
                           const std::string& new_name) {
    if (sources.size() < 2) throw ConfigError("merge_columns needs at least two source columns");
    std::vector<std::size_t> src;
    for (const auto& name : sources) {
        std::size_t c = table.require_column(name);
        if (table.column_kinds[c] != ColumnKind::categorical)
            throw DataError("merge source '" + name + "' is not categorical");
        src.push_back(c);
    }

    std::vector<std::string> merged_label(table.rows);
    std::vector<std::uint8_t> merged_missing(table.rows, 0);
    std::set<std::string> label_set;
    for (std::size_t r = 0; r < table.rows; ++r) {
        std::string label;
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (table.is_missing(r, src[i])) {
                merged_missing[r] = 1;
                break;
            }
            if (i) label += "|";
            label += table.categories[src[i]][static_cast<std::size_t>(table.at(r, src[i]))];
        }
        if (!merged_missing[r]) {
            merged_label[r] = label;
            label_set.insert(label);
        }
    }
    std::vector<std::string> labels(label_set.begin(), label_set.end());

    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < table.cols(); ++c)
        if (std::find(src.begin(), src.end(), c) == src.end()) keep.push_back(c);
    FeatureTable out = table.select_columns(keep);

    FeatureTable wider;
    wider.rows = out.rows;
    wider.outcome = out.outcome;
    wider.column_names = out.column_names;
    wider.column_kinds = out.column_kinds;
    wider.categories = out.categories;
    wider.column_names.push_back(new_name);
    wider.column_kinds.push_back(ColumnKind::categorical);
    wider.categories.push_back(labels);
    const std::size_t w = wider.column_names.size();
    wider.values.resize(out.rows * w);
    wider.missing_mask.resize(out.rows * w);
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c + 1 < w; ++c) {
            wider.values[r * w + c] = out.at(r, c);
            wider.missing_mask[r * w + c] = out.missing_mask[r * out.cols() + c];
        }
        if (merged_missing[r]) {
            wider.values[r * w + w - 1] = std::numeric_limits<double>::quiet_NaN();
            wider.missing_mask[r * w + w - 1] = 1;
        } else {
            auto it = std::lower_bound(labels.begin(), labels.end(), merged_label[r]);
            wider.values[r * w + w - 1] = static_cast<double>(it - labels.begin());
            wider.missing_mask[r * w + w - 1] = 0;
        }
    }
    wider.validate();
    return wider;
}

FeatureTable keep_last_by_key(const FeatureTable& table, const std::string& key_column) {
    std::size_t key = table.require_column(key_column);
    std::map<std::string, std::size_t> last; // key repr -> last row
    auto key_repr = [&](std::size_t r) {
        if (table.column_kinds[key] == ColumnKind::categorical)
            return table.categories[key][static_cast<std::size_t>(table.at(r, key))];
        return std::to_string(table.at(r, key));
    };
    for (std::size_t r = 0; r < table.rows; ++r)
        if (!table.is_missing(r, key)) last[key_repr(r)] = r;
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < table.rows; ++r) {
        if (table.is_missing(r, key) || last[key_repr(r)] == r) keep.push_back(r);
    }
    return table.select_rows(keep);
}

FeatureTable derive_severity(const FeatureTable& table, const SeverityRule& rule) {
    const std::array<std::string, 3> names = {rule.died_column, rule.icu_column,
                                              rule.ventilation_column};
    std::vector<std::size_t> cols;
    for (const auto& name : names) {
        std::size_t c = table.require_column(name);
        if (table.column_kinds[c] != ColumnKind::binary)
            throw DataError("severity rule column '" + name + "' is not binary");
        cols.push_back(c);
    }
    std::vector<std::uint8_t> outcome(table.rows, 0);
    for (std::size_t r = 0; r < table.rows; ++r) {
        for (std::size_t c : cols) {
            if (table.is_missing(r, c))
                throw DataError("missing value in severity column '" + table.column_names[c] +
                                "' at row " + std::to_string(r));
            if (table.at(r, c) != 0.0) outcome[r] = 1;
        }
    }
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < table.cols(); ++c)
        if (std::find(cols.begin(), cols.end(), c) == cols.end()) keep.push_back(c);
    FeatureTable out = table.select_columns(keep);
    out.outcome = std::move(outcome);
    return out;
}

FeatureTable outcome_from_column(const FeatureTable& table, const std::string& column) {
    std::size_t c = table.require_column(column);
    if (table.column_kinds[c] != ColumnKind::binary)
        throw DataError("outcome column '" + column + "' is not binary");
    std::vector<std::uint8_t> outcome(table.rows);
    for (std::size_t r = 0; r < table.rows; ++r) {
        if (table.is_missing(r, c))
            throw DataError("missing value in outcome column at row " + std::to_string(r));
        outcome[r] = table.at(r, c) != 0.0 ? 1 : 0;
    }
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < table.cols(); ++k)
        if (k != c) keep.push_back(k);
    FeatureTable out = table.select_columns(keep);
    out.outcome = std::move(outcome);
    return out;
}

FeatureTable apply_normalization(const FeatureTable& table, const NormalizationRecord& record) {
    FeatureTable out = table;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        if (table.column_kinds[c] != ColumnKind::numeric) continue;
        auto it = record.ranges.find(table.column_names[c]);
        if (it == record.ranges.end())
            throw DataError("normalization record lacks column '" + table.column_names[c] + "'");
        const auto [lo, hi] = it->second;
        for (std::size_t r = 0; r < table.rows; ++r) {
            if (out.is_missing(r, c)) continue;
            out.at(r, c) = (hi > lo) ? (out.at(r, c) - lo) / (hi - lo) : 0.0;
        }
    }
    return out;
}

std::pair<FeatureTable, NormalizationRecord> normalize_unit_range(const FeatureTable& table) {
    NormalizationRecord record;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        if (table.column_kinds[c] != ColumnKind::numeric) continue;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < table.rows; ++r) {
            if (table.is_missing(r, c)) continue;
            lo = std::min(lo, table.at(r, c));
            hi = std::max(hi, table.at(r, c));
        }
        if (!(lo < hi)) record.constant_columns.push_back(table.column_names[c]);
        record.ranges[table.column_names[c]] = {lo, hi};
    }
    return {apply_normalization(table, record), record};
}

FeatureTable drop_rows_with_missing(const FeatureTable& table) {
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < table.rows; ++r) {
        bool any = false;
        for (std::size_t c = 0; c < table.cols() && !any; ++c) any = table.is_missing(r, c);
        if (!any) keep.push_back(r);
    }
    if (keep.empty()) throw DataError("empty table: every row has a missing value");
    return table.select_rows(keep);
}

Split split_train_test(const FeatureTable& table, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("train fraction must lie in (0,1)");
    if (!table.outcome) throw DataError("split requires a table with an outcome");
    if (table.rows < 2) throw DataError("need at least 2 rows to split");
    std::vector<std::size_t> idx(table.rows);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);
    const std::size_t cut =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(table.rows)));
    if (cut == 0 || cut == table.rows)
        throw DataError("split leaves one side empty (n=" + std::to_string(table.rows) + ")");
    Split s;
    s.seed = seed;
    s.train_fraction = fraction;
    s.train_indices.assign(idx.begin(), idx.begin() + cut);
    s.test_indices.assign(idx.begin() + cut, idx.end());
    return s;
}

} // namespace xtab

#include "xtab/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "xtab/errors.hpp"

namespace xtab {

using nlohmann::json;

std::string SelectionReport::to_json() const {
    json j;
    j["dropped"] = json::array();
    for (const auto& d : dropped)
        j["dropped"].push_back({{"column", d.column}, {"reason", d.reason}, {"statistic", d.statistic}});
    j["kept"] = kept;
    if (!mi_scores.empty()) j["mi_scores"] = mi_scores;
    if (!correlation.empty()) j["correlation"] = correlation;
    if (!notes.empty()) j["notes"] = notes;
    return j.dump(2);
}

void SelectionReport::write_correlation_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write correlation csv '" + path + "'");
    out << "column";
    for (const auto& name : kept) out << "," << name;
    out << "\n";
    char buf[32];
    for (std::size_t i = 0; i < kept.size(); ++i) {
        out << kept[i];
        for (std::size_t k = 0; k < kept.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.6f", correlation[i][k]);
            out << "," << buf;
        }
        out << "\n";
    }
}

namespace {

std::pair<FeatureTable, SelectionReport> drop_by(const FeatureTable& table,
                                                 const std::vector<SelectionReport::Dropped>& drops) {
    SelectionReport report;
    report.dropped = drops;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        bool dropped = false;
        for (const auto& d : drops) dropped = dropped || d.column == table.column_names[c];
        if (!dropped) {
            keep.push_back(c);
            report.kept.push_back(table.column_names[c]);
        }
    }
    if (report.kept.empty()) report.notes.push_back("all columns dropped");
    return {table.select_columns(keep), std::move(report)};
}

} // namespace

std::pair<FeatureTable, SelectionReport> filter_missing_rate(const FeatureTable& table,
                                                             double threshold) {
    if (threshold < 0.0 || threshold > 1.0) throw ConfigError("missing-rate threshold must be in [0,1]");
    std::vector<SelectionReport::Dropped> drops;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        double frac = table.rows ? static_cast<double>(table.missing_count(c)) /
                                       static_cast<double>(table.rows)
                                 : 0.0;
        if (frac > threshold) drops.push_back({table.column_names[c], "missing_rate", frac});
    }
    return drop_by(table, drops);
}

std::pair<FeatureTable, SelectionReport> filter_low_variance(const FeatureTable& table,
                                                             double dominance) {
    if (!(dominance > 0.0 && dominance <= 1.0)) throw ConfigError("dominance must be in (0,1]");
    std::vector<SelectionReport::Dropped> drops;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        if (table.column_kinds[c] != ColumnKind::binary) continue;
        std::size_t ones = 0, seen = 0;
        for (std::size_t r = 0; r < table.rows; ++r) {
            if (table.is_missing(r, c)) continue;
            ++seen;
            if (table.at(r, c) != 0.0) ++ones;
        }
        if (seen == 0) {
            drops.push_back({table.column_names[c], "low_variance", 1.0});
            continue;
        }
        double modal = std::max(ones, seen - ones) / static_cast<double>(seen);
        if (modal >= dominance) drops.push_back({table.column_names[c], "low_variance", modal});
    }
    return drop_by(table, drops);
}

double mutual_information(const std::vector<int>& x, const std::vector<int>& y) {
    if (x.size() != y.size()) throw DataError("mutual_information: length mismatch");
    if (x.empty()) throw DataError("mutual_information: empty vectors");
    std::map<int, double> px, py;
    std::map<std::pair<int, int>, double> pxy;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        px[x[i]] += 1.0;
        py[y[i]] += 1.0;
        pxy[{x[i], y[i]}] += 1.0;
    }
    // Canonical summation order (sorted term values) makes the estimator
    // exactly symmetric in its arguments.
    std::vector<double> terms;
    terms.reserve(pxy.size());
    for (const auto& [key, cnt] : pxy) {
        const double pj = cnt / n;
        const double pmx = px[key.first] / n;
        const double pmy = py[key.second] / n;
        terms.push_back(pj * std::log(pj / (pmx * pmy)));
    }
    std::sort(terms.begin(), terms.end());
    double mi = 0.0;
    for (double t : terms) mi += t;
    return mi;
}

std::vector<int> discretize_equal_frequency(const std::vector<double>& values,
                                            const std::vector<std::uint8_t>& missing, int bins) {
    std::vector<double> obs;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!(i < missing.size() && missing[i])) obs.push_back(values[i]);
    std::sort(obs.begin(), obs.end());
    std::vector<double> distinct = obs;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<int> out(values.size(), -1);
    if (obs.empty()) return out;

    if (static_cast<int>(distinct.size()) <= bins) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i < missing.size() && missing[i]) continue;
            out[i] = static_cast<int>(
                std::lower_bound(distinct.begin(), distinct.end(), values[i]) - distinct.begin());
        }
        return out;
    }
    // Upper bin edges at the k*n/bins order statistics; duplicate edges collapse.
    std::vector<double> edges;
    for (int k = 1; k < bins; ++k) {
        double e = obs[obs.size() * static_cast<std::size_t>(k) / static_cast<std::size_t>(bins)];
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i < missing.size() && missing[i]) continue;
        out[i] = static_cast<int>(std::lower_bound(edges.begin(), edges.end(), values[i]) -
                                  edges.begin());
    }
    return out;
}

double column_outcome_mi(const FeatureTable& table, std::size_t column, int bins) {
    if (!table.outcome) throw DataError("mutual information with outcome requires an outcome");
    std::vector<double> vals(table.rows);
    std::vector<std::uint8_t> miss(table.rows);
    for (std::size_t r = 0; r < table.rows; ++r) {
        vals[r] = table.at(r, column);
        miss[r] = table.missing_mask[r * table.cols() + column];
    }
    std::vector<int> xb = table.column_kinds[column] == ColumnKind::numeric
                              ? discretize_equal_frequency(vals, miss, bins)
                              : [&] {
                                    std::vector<int> v(table.rows, -1);
                                    for (std::size_t r = 0; r < table.rows; ++r)
                                        if (!miss[r]) v[r] = static_cast<int>(vals[r]);
                                    return v;
                                }();
    std::vector<int> x, y;
    for (std::size_t r = 0; r < table.rows; ++r) {
        if (xb[r] < 0) continue;
        x.push_back(xb[r]);
        y.push_back((*table.outcome)[r]);
    }
    if (x.empty()) return 0.0;
    return mutual_information(x, y);
}

std::pair<FeatureTable, SelectionReport> rank_by_mutual_information(const FeatureTable& table,
                                                                    std::size_t top_k, int bins) {
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    std::vector<std::pair<double, std::string>> scored; // (mi, name)
    std::map<std::string, double> mi_of;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        double mi = column_outcome_mi(table, c, bins);
        scored.emplace_back(mi, table.column_names[c]);
        mi_of[table.column_names[c]] = mi;
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    SelectionReport report;
    std::size_t kept_n = std::min(top_k, scored.size());
    if (top_k > scored.size())
        report.notes.push_back("top_k exceeds column count; keeping all columns");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < kept_n; ++i) {
        report.kept.push_back(scored[i].second);
        report.mi_scores.push_back(scored[i].first);
        keep.push_back(table.require_column(scored[i].second));
    }
    for (std::size_t i = kept_n; i < scored.size(); ++i)
        report.dropped.push_back({scored[i].second, "low_mutual_information", scored[i].first});
    return {table.select_columns(keep), std::move(report)};
}

double pearson(const FeatureTable& table, std::size_t a, std::size_t b) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < table.rows; ++r) {
        if (table.is_missing(r, a) || table.is_missing(r, b)) continue;
        const double x = table.at(r, a), y = table.at(r, b);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    const double nn = static_cast<double>(n);
    const double vx = sxx - sx * sx / nn;
    const double vy = syy - sy * sy / nn;
    if (vx <= 0.0 || vy <= 0.0) return 0.0; // zero variance, defined as 0
    return (sxy - sx * sy / nn) / std::sqrt(vx * vy);
}

std::vector<std::vector<double>> correlation_matrix(const FeatureTable& table) {
    const std::size_t d = table.cols();
    std::vector<std::vector<double>> m(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        m[i][i] = 1.0;
        for (std::size_t k = i + 1; k < d; ++k) m[i][k] = m[k][i] = pearson(table, i, k);
    }
    return m;
}

std::pair<FeatureTable, SelectionReport> prune_correlated(const FeatureTable& table,
                                                          double threshold, int bins) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("correlation threshold must be in (0,1]");
    const std::size_t d = table.cols();

    struct Pair {
        double abs_r;
        double r;
        std::size_t a, b;
    };
    std::vector<Pair> pairs;
    std::vector<bool> zero_var(d, false);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = i + 1; k < d; ++k) {
            double r = pearson(table, i, k);
            pairs.push_back({std::fabs(r), r, i, k});
        }
    for (std::size_t i = 0; i < d; ++i) {
        bool constant = true;
        double first = 0.0;
        bool have = false;
        for (std::size_t r = 0; r < table.rows && constant; ++r) {
            if (table.is_missing(r, i)) continue;
            if (!have) {
                first = table.at(r, i);
                have = true;
            } else if (table.at(r, i) != first) {
                constant = false;
            }
        }
        zero_var[i] = constant;
    }
    // Highest |r| first; name ordering breaks exact ties for determinism.
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& x, const Pair& y) {
        if (x.abs_r != y.abs_r) return x.abs_r > y.abs_r;
        if (table.column_names[x.a] != table.column_names[y.a])
            return table.column_names[x.a] < table.column_names[y.a];
        return table.column_names[x.b] < table.column_names[y.b];
    });

    std::vector<bool> alive(d, true);
    SelectionReport report;
    for (std::size_t i = 0; i < d; ++i)
        if (zero_var[i]) report.notes.push_back("zero-variance column: " + table.column_names[i]);

    const bool have_outcome = table.outcome.has_value();
    std::vector<double> mi(d, 0.0);
    if (have_outcome)
        for (std::size_t c = 0; c < d; ++c) mi[c] = column_outcome_mi(table, c, bins);

    for (const auto& p : pairs) {
        if (!(p.abs_r > threshold)) break;
        if (!alive[p.a] || !alive[p.b]) continue;
        std::size_t victim;
        if (mi[p.a] != mi[p.b]) {
            victim = mi[p.a] < mi[p.b] ? p.a : p.b;
        } else {
            victim = table.column_names[p.a] < table.column_names[p.b] ? p.b : p.a;
        }
        std::size_t kept_col = victim == p.a ? p.b : p.a;
        alive[victim] = false;
        report.dropped.push_back(
            {table.column_names[victim], "correlated_with:" + table.column_names[kept_col], p.r});
    }

    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < d; ++c)
        if (alive[c]) {
            keep.push_back(c);
            report.kept.push_back(table.column_names[c]);
            if (have_outcome) report.mi_scores.push_back(mi[c]);
        }
    FeatureTable pruned = table.select_columns(keep);
    report.correlation = correlation_matrix(pruned);
    return {std::move(pruned), std::move(report)};
}

std::pair<FeatureTable, SelectionReport> exclude_columns(const FeatureTable& table,
                                                         const std::vector<std::string>& names) {
    std::vector<SelectionReport::Dropped> drops;
    for (const auto& name : names) {
        if (table.column_index(name) < 0) continue; // absent excludes are a no-op
        drops.push_back({name, "excluded", 0.0});
    }
    return drop_by(table, drops);
}

} // namespace xtab

#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "xtab/errors.hpp"
#include "xtab/rng.hpp"
#include "xtab/selection.hpp"
#include "xtab/synth.hpp"
#include "xtab/table.hpp"

using namespace xtab;

namespace {

FeatureTable numeric_table(const std::vector<std::vector<double>>& columns,
                           std::vector<std::string> names = {}) {
    const std::size_t d = columns.size();
    const std::size_t rows = columns.front().size();
    if (names.empty())
        for (std::size_t c = 0; c < d; ++c) names.push_back("C" + std::to_string(c));
    FeatureTable t = FeatureTable::with_shape(
        std::move(names), std::vector<ColumnKind>(d, ColumnKind::numeric), rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < d; ++c) {
            t.at(r, c) = columns[c][r];
            t.missing_mask[r * d + c] = 0;
        }
    return t;
}

bool was_dropped(const SelectionReport& rep, const std::string& name) {
    return std::any_of(rep.dropped.begin(), rep.dropped.end(),
                       [&](const auto& d) { return d.column == name; });
}

} // namespace

TEST_CASE("filter_missing_rate drops columns strictly above the threshold") {
    FeatureTable t = numeric_table({std::vector<double>(20, 1.0), std::vector<double>(20, 2.0)},
                                   {"mostly", "full"});
    for (std::size_t r = 0; r < 5; ++r) t.set_missing(r, 0); // 25% missing
    auto [out, rep] = filter_missing_rate(t, 0.20);
    CHECK(was_dropped(rep, "mostly"));
    CHECK(out.column_index("full") >= 0);
    CHECK(rep.dropped[0].statistic == doctest::Approx(0.25));
    SUBCASE("fully observed columns survive any threshold") {
        auto [out2, rep2] = filter_missing_rate(t, 0.0);
        CHECK(out2.column_index("full") >= 0);
    }
}

TEST_CASE("planted missing fractions {0.1,0.3,0.5} at threshold 0.2 drop exactly two") {
    const std::size_t rows = 100;
    FeatureTable t = numeric_table({std::vector<double>(rows, 1.0), std::vector<double>(rows, 2.0),
                                    std::vector<double>(rows, 3.0)},
                                   {"a", "b", "c"});
    for (std::size_t r = 0; r < 10; ++r) t.set_missing(r, 0);
    for (std::size_t r = 0; r < 30; ++r) t.set_missing(r, 1);
    for (std::size_t r = 0; r < 50; ++r) t.set_missing(r, 2);
    auto [out, rep] = filter_missing_rate(t, 0.2);
    CHECK(rep.dropped.size() == 2);
    CHECK(out.cols() == 1);
    CHECK(out.column_names[0] == "a");
}

TEST_CASE("filter_low_variance drops dominated binary columns") {
    const std::size_t rows = 100;
    std::vector<double> dominated(rows, 0.0), balanced(rows, 0.0), ones(rows, 1.0);
    for (std::size_t r = 0; r < 5; ++r) dominated[r] = 1.0;  // 95% zeros
    for (std::size_t r = 0; r < 50; ++r) balanced[r] = 1.0;  // 50/50
    FeatureTable t = numeric_table({dominated, balanced, ones}, {"dom", "bal", "ones"});
    t.column_kinds = {ColumnKind::binary, ColumnKind::binary, ColumnKind::binary};
    auto [out, rep] = filter_low_variance(t, 0.9);
    CHECK(was_dropped(rep, "dom"));
    CHECK(was_dropped(rep, "ones")); // frequency 1.0 >= any dominance
    CHECK_FALSE(was_dropped(rep, "bal"));
    CHECK(out.cols() == 1);
}

TEST_CASE("mutual information of an exactly independent product table is zero") {
    // joint counts = product of marginals: 12 samples, p(x=1)=1/2, p(y=1)=1/3
    std::vector<int> x, y;
    for (int xi = 0; xi < 2; ++xi)
        for (int yi = 0; yi < 3; ++yi) {
            x.push_back(xi);
            y.push_back(yi == 2 ? 1 : 0);
            x.push_back(xi);
            y.push_back(yi == 2 ? 1 : 0);
        }
    CHECK(std::fabs(mutual_information(x, y)) <= 1e-12);
}

TEST_CASE("mutual information of identical uniform binary vectors is ln 2") {
    std::vector<int> x;
    for (int i = 0; i < 50; ++i) {
        x.push_back(0);
        x.push_back(1);
    }
    CHECK(mutual_information(x, x) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("mutual information matches the hand-evaluated plug-in formula") {
    // joint counts [[2,1],[1,2]] over 6 samples
    std::vector<int> x = {0, 0, 0, 1, 1, 1};
    std::vector<int> y = {0, 0, 1, 0, 1, 1};
    // direct summation oracle over the four cells
    auto term = [](double pxy, double px, double py) { return pxy * std::log(pxy / (px * py)); };
    const double expected = term(2.0 / 6, 0.5, 0.5) + term(1.0 / 6, 0.5, 0.5) +
                            term(1.0 / 6, 0.5, 0.5) + term(2.0 / 6, 0.5, 0.5);
    CHECK(mutual_information(x, y) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("mutual information is symmetric and near non-negative") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<int> x, y;
        for (int i = 0; i < 200; ++i) {
            x.push_back(static_cast<int>(rng.below(4)));
            y.push_back(static_cast<int>(rng.below(3)));
        }
        const double mi_xy = mutual_information(x, y);
        CHECK(mi_xy == mutual_information(y, x));
        CHECK(mi_xy >= -1e-12);
    }
}

TEST_CASE("MI against a permuted outcome-independent column tends to zero") {
    const std::size_t n = 10000;
    Rng rng(17);
    std::vector<int> outcome, feature;
    for (std::size_t i = 0; i < n; ++i) {
        outcome.push_back(static_cast<int>(rng.below(2)));
        feature.push_back(static_cast<int>(rng.below(10)));
    }
    CHECK(mutual_information(feature, outcome) < 0.01);
}

TEST_CASE("mutual information input guards") {
    CHECK_THROWS_AS(mutual_information({1, 2}, {1}), DataError);
    CHECK_THROWS_AS(mutual_information({}, {}), DataError);
}

TEST_CASE("rank_by_mutual_information finds the planted informative features") {
    SynthConfig cfg;
    cfg.rows = 1500;
    cfg.features = 30;
    cfg.informative = {{2, 3.0}, {5, -3.0}, {11, 2.5}, {17, 3.5}, {23, -2.5}};
    cfg.seed = 4;
    auto [table, truth] = generate(cfg);
    auto [out, rep] = rank_by_mutual_information(table, 8);
    REQUIRE(rep.kept.size() == 8);
    for (const auto& name : {"X2", "X5", "X11", "X17", "X23"})
        CHECK(std::find(rep.kept.begin(), rep.kept.end(), name) != rep.kept.end());
    // descending scores
    for (std::size_t i = 1; i < rep.mi_scores.size(); ++i)
        CHECK(rep.mi_scores[i - 1] >= rep.mi_scores[i]);
}

TEST_CASE("rank_by_mutual_information with top_k = column count is a permutation") {
    SynthConfig cfg;
    cfg.rows = 200;
    cfg.features = 6;
    cfg.informative = {{0, 2.0}};
    cfg.seed = 9;
    auto [table, truth] = generate(cfg);
    auto [out, rep] = rank_by_mutual_information(table, 6);
    CHECK(rep.kept.size() == 6);
    auto sorted = rep.kept;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::string> expected = table.column_names;
    std::sort(expected.begin(), expected.end());
    CHECK(sorted == expected);

    SUBCASE("top_k above the column count keeps all and flags it") {
        auto [out2, rep2] = rank_by_mutual_information(table, 99);
        CHECK(rep2.kept.size() == 6);
        REQUIRE_FALSE(rep2.notes.empty());
    }
}

TEST_CASE("a duplicated column ranks adjacent to its twin") {
    SynthConfig cfg;
    cfg.rows = 400;
    cfg.features = 8;
    cfg.informative = {{0, 3.0}};
    cfg.duplicate_pairs = {{0, 1, 0.0}};
    cfg.seed = 12;
    auto [table, truth] = generate(cfg);
    auto [out, rep] = rank_by_mutual_information(table, 8);
    const auto pos0 = std::find(rep.kept.begin(), rep.kept.end(), "X0") - rep.kept.begin();
    const auto pos1 = std::find(rep.kept.begin(), rep.kept.end(), "X1") - rep.kept.begin();
    CHECK(std::abs(pos0 - pos1) == 1); // identical MI, adjacent, tie broken by name
    CHECK(pos0 < pos1);
}

TEST_CASE("prune_correlated drops one copy of a duplicated column") {
    SynthConfig cfg;
    cfg.rows = 300;
    cfg.features = 5;
    cfg.informative = {{0, 2.0}};
    cfg.duplicate_pairs = {{2, 3, 0.0}};
    cfg.seed = 2;
    auto [table, truth] = generate(cfg);
    CHECK(pearson(table, 2, 3) == doctest::Approx(1.0).epsilon(1e-12));
    auto [out, rep] = prune_correlated(table, 0.8);
    CHECK(rep.dropped.size() == 1);
    CHECK(out.cols() == 4);
    const bool has2 = out.column_index("X2") >= 0;
    const bool has3 = out.column_index("X3") >= 0;
    CHECK(has2 != has3);
}

TEST_CASE("prune_correlated keeps the higher-MI member of a planted r~0.9 pair") {
    SynthConfig cfg;
    cfg.rows = 2000;
    cfg.features = 4;
    cfg.informative = {{0, 4.0}};
    cfg.duplicate_pairs = {{0, 1, 0.13}}; // noisy copy, r ~ 0.9, less label-informative
    cfg.seed = 21;
    auto [table, truth] = generate(cfg);
    const double r = pearson(table, 0, 1);
    CHECK(std::fabs(r) > 0.8);
    CHECK(std::fabs(r) < 0.97);
    auto [out, rep] = prune_correlated(table, 0.8);
    CHECK(out.column_index("X0") >= 0); // the true informative column survives
    CHECK(out.column_index("X1") < 0);
    REQUIRE(rep.dropped.size() == 1);
    CHECK(rep.dropped[0].reason == "correlated_with:X0");
}

TEST_CASE("independent noise columns survive pruning at 0.8") {
    SynthConfig cfg;
    cfg.rows = 500;
    cfg.features = 10;
    cfg.informative = {{0, 1.0}};
    cfg.seed = 30;
    auto [table, truth] = generate(cfg);
    auto [out, rep] = prune_correlated(table, 0.8);
    CHECK(rep.dropped.empty());
    CHECK(out.cols() == 10);
}

TEST_CASE("prune_correlated is idempotent") {
    SynthConfig cfg;
    cfg.rows = 250;
    cfg.features = 6;
    cfg.informative = {{0, 2.0}};
    cfg.duplicate_pairs = {{1, 2, 0.0}, {4, 5, 0.05}};
    cfg.seed = 8;
    auto [table, truth] = generate(cfg);
    auto [once, rep1] = prune_correlated(table, 0.8);
    auto [twice, rep2] = prune_correlated(once, 0.8);
    CHECK(rep2.dropped.empty());
    CHECK(once.column_names == twice.column_names);
    CHECK(once.values == twice.values);
}

TEST_CASE("zero-variance columns correlate as zero and are flagged") {
    FeatureTable t = numeric_table({{1, 1, 1, 1}, {0.5, 0.25, 0.75, 0.1}}, {"const", "var"});
    CHECK(pearson(t, 0, 1) == 0.0);
    auto [out, rep] = prune_correlated(t, 0.8);
    REQUIRE_FALSE(rep.notes.empty());
    CHECK(rep.notes[0] == "zero-variance column: const");
}

TEST_CASE("pearson is 1 on itself and invariant under positive affine maps") {
    Rng rng(5);
    std::vector<double> base(60);
    for (auto& v : base) v = rng.uniform01();
    std::vector<double> scaled(60);
    for (std::size_t i = 0; i < 60; ++i) scaled[i] = 3.5 * base[i] + 1.25;
    FeatureTable t = numeric_table({base, scaled, base}, {"a", "b", "a2"});
    CHECK(std::fabs(pearson(t, 0, 2) - 1.0) <= 1e-12);
    CHECK(pearson(t, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    // correlation matrix diagonal
    auto m = correlation_matrix(t);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(m[i][i] - 1.0) <= 1e-12);
}

TEST_CASE("exclude_columns drops the listed columns and ignores absent names") {
    FeatureTable t = numeric_table({{1, 2}, {3, 4}}, {"SPO", "AGE"});
    auto [out, rep] = exclude_columns(t, {"SPO", "NOT_THERE"});
    CHECK(out.cols() == 1);
    CHECK(out.column_names[0] == "AGE");
    CHECK(rep.dropped.size() == 1);
}

TEST_CASE("discretize_equal_frequency uses at most the requested bin count") {
    Rng rng(6);
    std::vector<double> values(500);
    for (auto& v : values) v = rng.normal(0.0, 2.0);
    std::vector<std::uint8_t> missing(500, 0);
    auto bins = discretize_equal_frequency(values, missing, 10);
    const int max_bin = *std::max_element(bins.begin(), bins.end());
    CHECK(max_bin <= 9);
    CHECK(*std::min_element(bins.begin(), bins.end()) >= 0);
    // roughly equal occupancy
    std::vector<int> counts(static_cast<std::size_t>(max_bin) + 1, 0);
    for (int b : bins) counts[static_cast<std::size_t>(b)]++;
    for (int c : counts) CHECK(c >= 25);
    SUBCASE("few distinct values get their own bins") {
        std::vector<double> small = {3, 1, 2, 1, 3, 2, 1};
        std::vector<std::uint8_t> none(7, 0);
        auto small_bins = discretize_equal_frequency(small, none, 10);
        CHECK(small_bins == std::vector<int>{2, 0, 1, 0, 2, 1, 0});
    }
}

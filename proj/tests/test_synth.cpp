#include <cmath>

#include <doctest.h>

#include "helpers.hpp"
#include "xtab/errors.hpp"
#include "xtab/metrics.hpp"
#include "xtab/selection.hpp"
#include "xtab/synth.hpp"

using namespace xtab;
using test_helpers::TempDir;

TEST_CASE("zero planted coefficients make the labels fair coin flips") {
    SynthConfig cfg;
    cfg.rows = 10000;
    cfg.features = 4;
    cfg.informative = {{0, 0.0}};
    cfg.intercept = 0.0;
    cfg.seed = 1;
    auto [table, truth] = generate(cfg);
    double rate = 0.0;
    for (auto v : *table.outcome) rate += v;
    rate /= static_cast<double>(table.rows);
    CHECK(std::fabs(rate - 0.5) <= 0.05);
    for (double s : truth.true_score) CHECK(s == 0.5);
}

TEST_CASE("a noiseless duplicate pair is perfectly correlated") {
    SynthConfig cfg;
    cfg.rows = 250;
    cfg.features = 5;
    cfg.informative = {{0, 1.0}};
    cfg.duplicate_pairs = {{1, 4, 0.0}};
    cfg.seed = 2;
    auto [table, truth] = generate(cfg);
    CHECK(pearson(table, 1, 4) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a strongly planted feature alone scores AUC >= 0.85") {
    SynthConfig cfg;
    cfg.rows = 2000;
    cfg.features = 3;
    cfg.informative = {{1, 6.0}};
    cfg.intercept = 0.0;
    cfg.seed = 3;
    auto [table, truth] = generate(cfg);
    // Bayes-optimal score is monotone in the planted feature itself.
    CHECK(auc(table.column(1), *table.outcome).value >= 0.85);
}

TEST_CASE("generation is deterministic per seed, down to the csv bytes") {
    TempDir dir("synth_det");
    SynthConfig cfg = SynthConfig::default_cohort(11);
    for (int rep = 0; rep < 2; ++rep) {
        auto [table, truth] = generate(cfg);
        save_table(table, dir.file("t" + std::to_string(rep) + ".csv"), "SEVER");
    }
    CHECK(test_helpers::read_file(dir.file("t0.csv")) ==
          test_helpers::read_file(dir.file("t1.csv")));
    SUBCASE("a different seed moves the bytes") {
        cfg.seed = 12;
        auto [table, truth] = generate(cfg);
        save_table(table, dir.file("t2.csv"), "SEVER");
        CHECK(test_helpers::read_file(dir.file("t0.csv")) !=
              test_helpers::read_file(dir.file("t2.csv")));
    }
}

TEST_CASE("planted informative features carry more label information on average") {
    double informative_mi = 0.0, noise_mi = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SynthConfig cfg;
        cfg.rows = 800;
        cfg.features = 8;
        cfg.informative = {{1, 3.0}, {4, -3.0}};
        cfg.seed = 40 + seed;
        auto [table, truth] = generate(cfg);
        informative_mi += column_outcome_mi(table, 1) + column_outcome_mi(table, 4);
        noise_mi += column_outcome_mi(table, 0) + column_outcome_mi(table, 7);
    }
    CHECK(informative_mi / 2.0 > noise_mi / 2.0);
}

TEST_CASE("the default cohort matches the paper-shaped dimensions") {
    auto [table, truth] = generate(SynthConfig::default_cohort(13));
    CHECK(table.rows == 392);
    CHECK(table.cols() == 20);
    double rate = 0.0;
    for (auto v : *table.outcome) rate += v;
    rate /= static_cast<double>(table.rows);
    CHECK(rate > 0.2);
    CHECK(rate < 0.42);
}

TEST_CASE("degenerate configs are rejected") {
    SynthConfig cfg;
    cfg.rows = 10;
    cfg.features = 3;
    CHECK_THROWS_WITH_AS(generate(cfg), doctest::Contains("degenerate"), ConfigError);
    cfg.informative = {{9, 1.0}};
    CHECK_THROWS_AS(generate(cfg), ConfigError);
    cfg.informative = {{0, 1.0}};
    cfg.missing_rate = {0.5};
    CHECK_THROWS_AS(generate(cfg), ConfigError); // must cover every column
}

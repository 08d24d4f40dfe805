#include <doctest.h>

#include "helpers.hpp"
#include "xtab/errors.hpp"
#include "xtab/synth.hpp"
#include "xtab/table.hpp"

using namespace xtab;
using test_helpers::TempDir;
using test_helpers::write_file;

TEST_CASE("load_table flags an empty cell as missing, exactly there") {
    TempDir dir("table_missing");
    write_file(dir.file("d.csv"), "A,B\n1,2\n3,\n5,6\n");
    Schema schema = {{"A", ColumnKind::numeric}, {"B", ColumnKind::numeric}};
    FeatureTable t = load_table(dir.file("d.csv"), schema);
    REQUIRE(t.rows == 3);
    CHECK_FALSE(t.is_missing(0, 0));
    CHECK_FALSE(t.is_missing(0, 1));
    CHECK(t.is_missing(1, 1));
    CHECK_FALSE(t.is_missing(1, 0));
    CHECK(t.at(2, 1) == 6.0);
    CHECK(t.missing_count(1) == 1);
}

TEST_CASE("load_table rejects duplicate header names") {
    TempDir dir("table_dup");
    write_file(dir.file("d.csv"), "A,A\n1,2\n");
    Schema schema = {{"A", ColumnKind::numeric}};
    CHECK_THROWS_WITH_AS(load_table(dir.file("d.csv"), schema),
                         doctest::Contains("duplicate column"), DataError);
}

TEST_CASE("synthetic 392x20 file loads with the generated shape") {
    TempDir dir("table_synth");
    SynthConfig cfg = SynthConfig::default_cohort(21);
    auto [table, truth] = generate(cfg);
    save_table(table, dir.file("synth.csv"), "SEVER");
    save_schema(synth_schema(cfg, "SEVER"), dir.file("synth.schema"));

    FeatureTable loaded =
        load_table(dir.file("synth.csv"), load_schema(dir.file("synth.schema")));
    CHECK(loaded.rows == 392);
    CHECK(loaded.cols() == 21); // 20 features + outcome column
    CHECK(loaded.column_names[0] == "X0");
    CHECK(loaded.column_names[19] == "X19");
    // round trip values are bit-identical
    for (std::size_t r = 0; r < table.rows; ++r)
        for (std::size_t c = 0; c < table.cols(); ++c)
            REQUIRE(loaded.at(r, c) == table.at(r, c));
}

TEST_CASE("load_table reports the coordinates of a bad numeric cell") {
    TempDir dir("table_badcell");
    write_file(dir.file("d.csv"), "A,B\n1,2\n3,oops\n");
    Schema schema = {{"A", ColumnKind::numeric}, {"B", ColumnKind::numeric}};
    CHECK_THROWS_WITH_AS(load_table(dir.file("d.csv"), schema), doctest::Contains("row 1"),
                         DataError);
}

TEST_CASE("load_table rejects header columns absent from the schema") {
    TempDir dir("table_schema");
    write_file(dir.file("d.csv"), "A,C\n1,2\n");
    Schema schema = {{"A", ColumnKind::numeric}, {"B", ColumnKind::numeric}};
    CHECK_THROWS_AS(load_table(dir.file("d.csv"), schema), DataError);
}

TEST_CASE("binary columns must hold only 0/1") {
    TempDir dir("table_binary");
    write_file(dir.file("d.csv"), "A\n0\n2\n");
    Schema schema = {{"A", ColumnKind::binary}};
    CHECK_THROWS_AS(load_table(dir.file("d.csv"), schema), DataError);
}

TEST_CASE("categorical cells become sorted label ids and survive a round trip") {
    TempDir dir("table_cat");
    write_file(dir.file("d.csv"), "RACE,V\nB,1\nA,2\n,3\nB,4\n");
    Schema schema = {{"RACE", ColumnKind::categorical}, {"V", ColumnKind::numeric}};
    FeatureTable t = load_table(dir.file("d.csv"), schema);
    REQUIRE(t.categories[0].size() == 2);
    CHECK(t.categories[0][0] == "A");
    CHECK(t.categories[0][1] == "B");
    CHECK(t.at(0, 0) == 1.0);
    CHECK(t.at(1, 0) == 0.0);
    CHECK(t.is_missing(2, 0));

    save_table(t, dir.file("out.csv"));
    save_schema(schema, dir.file("out.schema"));
    FeatureTable again = load_table(dir.file("out.csv"), load_schema(dir.file("out.schema")));
    CHECK(again.at(3, 0) == t.at(3, 0));
    CHECK(again.is_missing(2, 0));
}

#include <filesystem>
#include <set>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "helpers.hpp"
#include "xtab/config.hpp"
#include "xtab/errors.hpp"
#include "xtab/runner.hpp"

using namespace xtab;
using test_helpers::TempDir;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Default synthetic cohort with the heavy knobs turned down for test speed.
RunConfig fast_synth_config(const std::string& out) {
    RunConfig cfg;
    cfg.set("data.synth", "true");
    cfg.set("out.dir", out);
    cfg.set("model.kind", "forest");
    cfg.set("model.trees", "25");
    cfg.set("model.max_depth", "5");
    cfg.set("explain.instances", "0,1");
    cfg.set("explain.background", "24");
    cfg.set("explain.summary_rows", "6");
    cfg.set("explain.summary_permutations", "12");
    cfg.set("explain.permutations", "40");
    cfg.set("explain.lime_samples", "400");
    cfg.set("meta.iterations", "120");
    cfg.set("meta.uniform_query", "150");
    return cfg;
}

std::set<std::string> dir_files(const std::string& dir) {
    std::set<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        names.insert(entry.path().filename().string());
    return names;
}

} // namespace

TEST_CASE("config files parse, flags override, validation bites") {
    TempDir dir("config");
    test_helpers::write_file(dir.file("run.cfg"),
                             "# comment\n"
                             "data.synth = true\n"
                             "model.kind = leafwise\n"
                             "select.top_k = 12\n");
    RunConfig cfg = RunConfig::from_file(dir.file("run.cfg"));
    CHECK(cfg.get_flag("data.synth", false));
    CHECK(cfg.get("model.kind", "") == "leafwise");
    CHECK(cfg.get_count("select.top_k", 0) == 12);

    cfg.set("model.kind", "forest"); // flag wins
    CHECK(cfg.get("model.kind", "") == "forest");

    SUBCASE("both data sources is a config error") {
        cfg.set("data.csv", "x.csv");
        cfg.set("data.schema", "x.schema");
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("threshold out of range") {
        cfg.set("select.dominance", "1.5");
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("bad model kind") {
        cfg.set("model.kind", "boosted");
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("malformed line") {
        test_helpers::write_file(dir.file("bad.cfg"), "no_equals_sign\n");
        CHECK_THROWS_AS(RunConfig::from_file(dir.file("bad.cfg")), ConfigError);
    }
}

TEST_CASE("derive_seeds pins every stage seed from one master") {
    RunConfig a;
    a.derive_seeds(5);
    RunConfig b;
    b.derive_seeds(5);
    for (const char* key : {"synth.seed", "split.seed", "model.seed", "explain.seed", "meta.seed"})
        CHECK(a.get(key) == b.get(key));
    RunConfig c;
    c.derive_seeds(6);
    CHECK(a.get("synth.seed") != c.get("synth.seed"));
}

TEST_CASE("stages demand their upstream artifacts by name") {
    TempDir dir("stage_order");
    RunConfig cfg = fast_synth_config(dir.file("out"));
    CHECK_THROWS_WITH_AS(stage_select(cfg), doctest::Contains("run stage preprocess first"),
                         DataError);
    CHECK_THROWS_WITH_AS(stage_train(cfg), doctest::Contains("run stage select first"),
                         DataError);
    CHECK_THROWS_WITH_AS(stage_metamodel(cfg), doctest::Contains("first"), DataError);
}

TEST_CASE("the full pipeline emits every artifact and the manifest lists all 8") {
    TempDir dir("pipeline");
    RunConfig cfg = fast_synth_config(dir.file("out"));
    const std::string out = run_pipeline(cfg);

    const auto files = dir_files(out);
    for (const char* name :
         {"preprocessed.csv", "selected.csv", "selection_report.json", "correlation.csv",
          "normalization.json", "split.json", "model.bin", "train_info.json",
          "auc_comparison.json", "shap_explanations.json", "shap_summary.json",
          "shap_summary.svg", "lime_explanations.json", "metamodel.json", "fit_trace.json",
          "metamodel_expression.txt", "rankings.json", "report.md", "manifest.json",
          "ground_truth.json", "shap_instance_0.svg", "lime_instance_0.svg"})
        CHECK_MESSAGE(files.count(name) == 1, "missing " << name);

    const json manifest = json::parse(test_helpers::read_file(out + "/manifest.json"));
    CHECK(manifest.at("artifacts").size() == 8);
    for (const auto& [key, value] : manifest.at("artifacts").items())
        CHECK(files.count(value.get<std::string>()) == 1);
    CHECK(manifest.at("stages").at("report") == "ok");

    SUBCASE("default top_k=20 yields the 210-term basis") {
        const json rankings = json::parse(test_helpers::read_file(out + "/rankings.json"));
        CHECK(rankings.at("basis_size") == 210);
        CHECK(rankings.at("features").size() == 5);
        CHECK(rankings.at("interactions").size() == 2);
    }
    SUBCASE("every report.md number exists in a machine-readable artifact") {
        const json cmp = json::parse(test_helpers::read_file(out + "/auc_comparison.json"));
        const std::string report = test_helpers::read_file(out + "/report.md");
        for (const auto& entry : cmp.at("entries")) {
            std::ostringstream value;
            value << entry.at("auc");
            CHECK(report.find(value.str()) != std::string::npos);
        }
    }
}

TEST_CASE("rerunning the pipeline reproduces every artifact byte for byte") {
    TempDir dir("determinism");
    RunConfig cfg1 = fast_synth_config(dir.file("a"));
    RunConfig cfg2 = fast_synth_config(dir.file("b"));
    run_pipeline(cfg1);
    run_pipeline(cfg2);

    const auto names = dir_files(dir.file("a"));
    CHECK(names == dir_files(dir.file("b")));
    for (const auto& name : names) {
        if (name == "manifest.json") {
            json a = json::parse(test_helpers::read_file(dir.file("a") + "/" + name));
            json b = json::parse(test_helpers::read_file(dir.file("b") + "/" + name));
            a.erase("generated_at");
            b.erase("generated_at");
            a.erase("config");
            b.erase("config"); // differs only in out.dir
            CHECK(a == b);
            continue;
        }
        CHECK_MESSAGE(test_helpers::read_file(dir.file("a") + "/" + name) ==
                          test_helpers::read_file(dir.file("b") + "/" + name),
                      "artifact differs: " << name);
    }
}

TEST_CASE("standalone stages produce the same bytes as the full pipeline") {
    TempDir dir("stagewise");
    RunConfig full = fast_synth_config(dir.file("full"));
    run_pipeline(full);

    RunConfig staged = fast_synth_config(dir.file("staged"));
    stage_preprocess(staged);
    stage_select(staged);
    stage_train(staged);
    CHECK(test_helpers::read_file(dir.file("full") + "/model.bin") ==
          test_helpers::read_file(dir.file("staged") + "/model.bin"));
    CHECK(test_helpers::read_file(dir.file("full") + "/split.json") ==
          test_helpers::read_file(dir.file("staged") + "/split.json"));
}

TEST_CASE("report is a pure re-render: running it twice changes nothing") {
    TempDir dir("report_rerun");
    RunConfig cfg = fast_synth_config(dir.file("out"));
    run_pipeline(cfg);
    const std::string before_md = test_helpers::read_file(dir.file("out") + "/report.md");
    const std::string before_svg = test_helpers::read_file(dir.file("out") + "/shap_summary.svg");
    stage_report(cfg);
    CHECK(test_helpers::read_file(dir.file("out") + "/report.md") == before_md);
    CHECK(test_helpers::read_file(dir.file("out") + "/shap_summary.svg") == before_svg);
}

TEST_CASE("explaining an out-of-range instance names the valid range") {
    TempDir dir("explain_range");
    RunConfig cfg = fast_synth_config(dir.file("out"));
    stage_preprocess(cfg);
    stage_select(cfg);
    stage_train(cfg);
    CHECK_THROWS_WITH_AS(explain_instance(cfg, 100000), doctest::Contains("valid ids are 0.."),
                         ConfigError);
}

// Batch CLI: train a tree-ensemble severity model on tabular data and explain
// it with SHAP, LIME and a global symbolic metamodel, emitting one
// self-contained report directory per run.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "xtab/config.hpp"
#include "xtab/errors.hpp"
#include "xtab/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string model_kind;
    long long seed = -1;
    bool synth = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run config file (key = value lines)");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "master seed; derives every stage seed");
    cmd->add_option("--model", flags.model_kind, "model kind: forest|leafwise|depthwise")
        ->check(CLI::IsMember({"forest", "leafwise", "depthwise"}));
    cmd->add_flag("--synth", flags.synth, "use the built-in synthetic cohort as data source");
}

xtab::RunConfig resolve(const CommonFlags& flags) {
    xtab::RunConfig cfg;
    if (!flags.config_path.empty()) cfg = xtab::RunConfig::from_file(flags.config_path);
    // flags win over file values
    if (flags.synth) cfg.set("data.synth", "true");
    if (!flags.out_dir.empty()) cfg.set("out.dir", flags.out_dir);
    if (!flags.model_kind.empty()) cfg.set("model.kind", flags.model_kind);
    if (flags.seed >= 0) cfg.derive_seeds(static_cast<std::uint64_t>(flags.seed));
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabular severity models with SHAP, LIME and symbolic metamodel reports"};
    app.require_subcommand(1);

    CommonFlags flags;
    long long instance_id = -1;

    auto* run = app.add_subcommand("run", "full pipeline: preprocess through report");
    auto* preprocess = app.add_subcommand("preprocess", "ingest, encode and derive the outcome");
    auto* select = app.add_subcommand("select", "feature filters, normalization, split prep");
    auto* train = app.add_subcommand("train", "split and fit the configured model");
    auto* explain = app.add_subcommand("explain", "SHAP and LIME explanations of test instances");
    auto* metamodel = app.add_subcommand("metamodel", "fit and render the symbolic metamodel");
    auto* report = app.add_subcommand("report", "regenerate charts and report.md from stored JSON");
    for (auto* cmd : {run, preprocess, select, train, explain, metamodel, report})
        add_common(cmd, flags);
    explain->add_option("--instance", instance_id, "explain a single test-row id");

    CLI11_PARSE(app, argc, argv);

    std::string stage = "startup";
    try {
        const xtab::RunConfig cfg = resolve(flags);
        if (run->parsed()) {
            stage = "run";
            std::string dir = xtab::run_pipeline(cfg);
            std::printf("report written to %s\n", dir.c_str());
        } else if (preprocess->parsed()) {
            stage = "preprocess";
            xtab::stage_preprocess(cfg);
        } else if (select->parsed()) {
            stage = "select";
            xtab::stage_select(cfg);
        } else if (train->parsed()) {
            stage = "train";
            xtab::stage_train(cfg);
        } else if (explain->parsed()) {
            stage = "explain";
            if (instance_id >= 0)
                xtab::explain_instance(cfg, static_cast<std::size_t>(instance_id));
            else
                xtab::stage_explain(cfg);
        } else if (metamodel->parsed()) {
            stage = "metamodel";
            xtab::stage_metamodel(cfg);
        } else if (report->parsed()) {
            stage = "report";
            xtab::stage_report(cfg);
        }
        return 0;
    } catch (const xtab::ConfigError& e) {
        std::fprintf(stderr, "[%s] config error: %s\n", stage.c_str(), e.what());
        return 2;
    } catch (const xtab::NumericError& e) {
        std::fprintf(stderr, "[%s] numeric failure: %s\n", stage.c_str(), e.what());
        return 4;
    } catch (const xtab::Error& e) {
        std::fprintf(stderr, "[%s] data error: %s\n", stage.c_str(), e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "[%s] error: %s\n", stage.c_str(), e.what());
        return 3;
    }
}

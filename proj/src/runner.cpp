#include "xtab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xtab/ensemble.hpp"
#include "xtab/errors.hpp"
#include "xtab/lime.hpp"
#include "xtab/metamodel.hpp"
#include "xtab/metrics.hpp"
#include "xtab/pipeline.hpp"
#include "xtab/rng.hpp"
#include "xtab/selection.hpp"
#include "xtab/shap.hpp"
#include "xtab/svg.hpp"
#include "xtab/synth.hpp"
#include "xtab/table.hpp"

namespace xtab {

const char* kToolVersion = "xtab 0.1.0";

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string out_dir(const RunConfig& config) {
    std::string dir = config.get("out.dir", "");
    if (dir.empty()) throw ConfigError("out.dir (or --out) is required");
    fs::create_directories(dir);
    return dir;
}

std::string path_in(const RunConfig& config, const std::string& name) {
    return (fs::path(out_dir(config)) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void require_artifact(const RunConfig& config, const std::string& name, const std::string& stage) {
    if (!fs::exists(path_in(config, name)))
        throw DataError("missing artifact '" + name + "': run stage " + stage + " first");
}

// The manifest is the only artifact carrying a timestamp; reruns are
// byte-identical everywhere else.
void update_manifest(const RunConfig& config, const std::string& stage,
                     const std::string& status) {
    const std::string path = path_in(config, "manifest.json");
    json manifest;
    if (fs::exists(path)) manifest = json::parse(read_text(path));
    manifest["tool"] = kToolVersion;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    manifest["generated_at"] = buf;
    json cfg;
    for (const auto& [k, v] : config.entries()) cfg[k] = v;
    manifest["config"] = cfg;
    manifest["seeds"] = {{"synth", config.get_seed("synth.seed", 13)},
                         {"split", config.get_seed("split.seed", 1)},
                         {"model", config.get_seed("model.seed", 7)},
                         {"explain", config.get_seed("explain.seed", 11)},
                         {"meta", config.get_seed("meta.seed", 3)}};
    manifest["stages"][stage] = status;
    manifest["artifacts"] = {
        {"preprocess_report", "preprocess_report.json"},
        {"selection_report", "selection_report.json"},
        {"model", "model.bin"},
        {"auc_comparison", "auc_comparison.json"},
        {"shap_explanations", "shap_explanations.json"},
        {"lime_explanations", "lime_explanations.json"},
        {"metamodel", "metamodel.json"},
        {"fit_trace", "fit_trace.json"},
    };
    write_text(path, manifest.dump(2) + "\n");
}

struct StageGuard {
    const RunConfig& config;
    std::string stage;
    bool ok = false;
    ~StageGuard() {
        try {
            update_manifest(config, stage, ok ? "ok" : "failed");
        } catch (...) {
        }
    }
};

std::string outcome_name(const RunConfig& config) {
    return config.get("pipeline.outcome_name", "SEVER");
}

FeatureTable load_with_outcome(const RunConfig& config, const std::string& csv,
                               const std::string& schema) {
    FeatureTable t = load_table(path_in(config, csv), load_schema(path_in(config, schema)));
    return outcome_from_column(t, outcome_name(config));
}

Schema schema_of(const FeatureTable& t) {
    Schema s;
    for (std::size_t c = 0; c < t.cols(); ++c) s.emplace_back(t.column_names[c], t.column_kinds[c]);
    return s;
}

void save_stage_table(const RunConfig& config, const FeatureTable& t, const std::string& base) {
    const std::string oname = outcome_name(config);
    save_table(t, path_in(config, base + ".csv"), oname);
    Schema s = schema_of(t);
    s.emplace_back(oname, ColumnKind::binary);
    save_schema(s, path_in(config, base + ".schema"));
}

SynthConfig synth_config_from(const RunConfig& config) {
    SynthConfig c = SynthConfig::default_cohort(config.get_seed("synth.seed", 13));
    c.rows = config.get_count("synth.rows", c.rows);
    c.features = config.get_count("synth.features", c.features);
    c.intercept = config.get_num("synth.intercept", c.intercept);
    if (config.has("synth.informative")) {
        c.informative.clear();
        for (const auto& item : config.get_list("synth.informative")) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("synth.informative entries must be idx:coeff");
            c.informative.emplace_back(std::stoul(item.substr(0, colon)),
                                       std::stod(item.substr(colon + 1)));
        }
    }
    if (config.has("synth.interaction")) {
        const auto parts = config.get_list("synth.interaction", ':');
        if (parts.empty()) {
            c.interaction_pair.reset();
        } else if (parts.size() == 3) {
            c.interaction_pair = SynthConfig::Interaction{
                std::stoul(parts[0]), std::stoul(parts[1]), std::stod(parts[2])};
        } else {
            throw ConfigError("synth.interaction must be i:j:coeff (or empty)");
        }
    }
    if (config.has("synth.duplicates")) {
        c.duplicate_pairs.clear();
        for (const auto& item : config.get_list("synth.duplicates", ';')) {
            std::vector<std::string> f;
            std::string cur;
            for (char ch : item + ":") {
                if (ch == ':') {
                    f.push_back(cur);
                    cur.clear();
                } else {
                    cur.push_back(ch);
                }
            }
            if (f.size() != 3) throw ConfigError("synth.duplicates entries must be src:tgt:std");
            c.duplicate_pairs.push_back(
                {std::stoul(f[0]), std::stoul(f[1]), std::stod(f[2])});
        }
    }
    const double missing = config.get_num("synth.missing", 0.0);
    if (missing > 0.0) c.missing_rate.assign(c.features, missing);
    return c;
}

Split load_split(const RunConfig& config) {
    require_artifact(config, "split.json", "train");
    json j = json::parse(read_text(path_in(config, "split.json")));
    Split s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train_fraction = j.at("fraction").get<double>();
    s.train_indices = j.at("train").get<std::vector<std::size_t>>();
    s.test_indices = j.at("test").get<std::vector<std::size_t>>();
    return s;
}

std::vector<std::vector<double>> rows_of(const FeatureTable& t,
                                         const std::vector<std::size_t>& indices) {
    std::vector<std::vector<double>> rows;
    rows.reserve(indices.size());
    for (std::size_t r : indices) {
        std::vector<double> row(t.cols());
        for (std::size_t c = 0; c < t.cols(); ++c) row[c] = t.at(r, c);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::size_t> background_indices(const std::vector<std::size_t>& train,
                                            std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> pool = train;
    Rng rng(mix_seed(seed, 99));
    const std::size_t k = std::min(count, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace

void stage_preprocess(const RunConfig& config) {
    config.validate();
    StageGuard guard{config, "preprocess"};

    FeatureTable table;
    json report;
    if (config.get_flag("data.synth", false)) {
        SynthConfig sc = synth_config_from(config);
        auto [t, truth] = generate(sc);
        write_text(path_in(config, "ground_truth.json"), truth.to_json() + "\n");
        table = std::move(t);
        report["source"] = "synthetic";
        report["rows_in"] = table.rows;
    } else {
        Schema schema = load_schema(config.get("data.schema"));
        table = load_table(config.get("data.csv"), schema);
        report["source"] = config.get("data.csv");
        report["rows_in"] = table.rows;

        for (const auto& spec : config.get_list("pipeline.merge", ';')) {
            // A+B>NEW
            const auto gt = spec.find('>');
            if (gt == std::string::npos) throw ConfigError("pipeline.merge entries must be A+B>NEW");
            std::vector<std::string> sources;
            std::string cur;
            for (char ch : spec.substr(0, gt) + "+") {
                if (ch == '+') {
                    sources.push_back(cur);
                    cur.clear();
                } else {
                    cur.push_back(ch);
                }
            }
            table = merge_columns(table, sources, spec.substr(gt + 1));
            report["merged"].push_back(spec);
        }
        const std::string dedup = config.get("pipeline.dedup_key", "");
        if (!dedup.empty()) {
            const std::size_t before = table.rows;
            table = keep_last_by_key(table, dedup);
            report["dedup_dropped"] = before - table.rows;
        }

        std::vector<std::string> categorical;
        for (std::size_t c = 0; c < table.cols(); ++c)
            if (table.column_kinds[c] == ColumnKind::categorical)
                categorical.push_back(table.column_names[c]);
        if (!categorical.empty()) {
            table = one_hot_encode(table, categorical);
            report["one_hot_encoded"] = categorical;
        }

        const std::string severity = config.get("pipeline.severity", "");
        if (!severity.empty()) {
            RunConfig tmp;
            tmp.set("x", severity);
            const auto cols = tmp.get_list("x");
            if (cols.size() != 3)
                throw ConfigError("pipeline.severity needs three column names (died,icu,vent)");
            table = derive_severity(table, {cols[0], cols[1], cols[2]});
            report["severity_rule"] = cols;
        } else {
            table = outcome_from_column(table, config.get("pipeline.outcome_column"));
            report["outcome_column"] = config.get("pipeline.outcome_column");
        }
    }

    const auto excludes = config.get_list("pipeline.exclude");
    if (!excludes.empty()) {
        auto [t, rep] = exclude_columns(table, excludes);
        table = std::move(t);
        for (const auto& d : rep.dropped) report["excluded"].push_back(d.column);
    }

    std::size_t positives = 0;
    for (auto v : *table.outcome) positives += v;
    report["rows_out"] = table.rows;
    report["columns"] = table.cols();
    report["outcome_positives"] = positives;
    report["outcome_negatives"] = table.rows - positives;

    save_stage_table(config, table, "preprocessed");
    write_text(path_in(config, "preprocess_report.json"), report.dump(2) + "\n");
    guard.ok = true;
}

void stage_select(const RunConfig& config) {
    config.validate();
    StageGuard guard{config, "select"};
    require_artifact(config, "preprocessed.csv", "preprocess");
    FeatureTable table = load_with_outcome(config, "preprocessed.csv", "preprocessed.schema");

    json steps = json::array();
    auto record = [&steps](const std::string& name, const SelectionReport& rep) {
        steps.push_back({{"step", name}, {"report", json::parse(rep.to_json())}});
    };

    const int bins = static_cast<int>(config.get_count("select.mi_bins", 10));

    auto [t1, r1] = filter_missing_rate(table, config.get_num("select.missing_threshold", 0.2));
    record("missing_rate", r1);
    auto [t2, r2] = filter_low_variance(t1, config.get_num("select.dominance", 0.9));
    record("low_variance", r2);
    auto [t3, r3] = rank_by_mutual_information(t2, config.get_count("select.top_k", 20), bins);
    record("mutual_information", r3);
    FeatureTable t4 = drop_rows_with_missing(t3);
    auto [t5, norm] = normalize_unit_range(t4);
    auto [t6, r6] = prune_correlated(t5, config.get_num("select.correlation_threshold", 0.8), bins);
    record("correlation_prune", r6);

    json selection;
    selection["steps"] = steps;
    selection["rows_after_drop"] = t4.rows;
    selection["final_columns"] = t6.column_names;
    write_text(path_in(config, "selection_report.json"), selection.dump(2) + "\n");
    r6.write_correlation_csv(path_in(config, "correlation.csv"));

    json norm_json;
    for (const auto& [col, range] : norm.ranges)
        norm_json[col] = {{"min", range.first}, {"max", range.second}};
    write_text(path_in(config, "normalization.json"), norm_json.dump(2) + "\n");

    save_stage_table(config, t6, "selected");
    guard.ok = true;
}

namespace {

EnsembleModel train_model(const RunConfig& config, const FeatureTable& train,
                          BoostTrace* trace) {
    const std::string kind = config.get("model.kind", "forest");
    const std::uint64_t seed = config.get_seed("model.seed", 7);
    if (kind == "forest")
        return fit_random_forest(train, config.get_count("model.trees", 200),
                                 config.get_count("model.max_depth", 8),
                                 config.get_count("model.features_per_split", 0), seed);
    if (kind == "leafwise")
        return fit_boosted_leafwise(train, config.get_count("model.rounds", 100),
                                    config.get_count("model.leaves", 31),
                                    config.get_num("model.learning_rate", 0.1), seed, trace);
    return fit_boosted_depthwise(train, config.get_count("model.rounds", 100),
                                 config.get_count("model.max_depth", 6),
                                 config.get_num("model.learning_rate", 0.1),
                                 config.get_num("model.l1", 0.0), config.get_num("model.l2", 1.0),
                                 seed, trace);
}

} // namespace

void stage_train(const RunConfig& config) {
    config.validate();
    StageGuard guard{config, "train"};
    require_artifact(config, "selected.csv", "select");
    FeatureTable table = load_with_outcome(config, "selected.csv", "selected.schema");

    Split split = split_train_test(table, config.get_num("split.fraction", 0.7),
                                   config.get_seed("split.seed", 1));
    json split_json;
    split_json["seed"] = split.seed;
    split_json["fraction"] = split.train_fraction;
    split_json["train"] = split.train_indices;
    split_json["test"] = split.test_indices;
    write_text(path_in(config, "split.json"), split_json.dump(2) + "\n");

    FeatureTable train = table.select_rows(split.train_indices);
    BoostTrace trace;
    EnsembleModel model = train_model(config, train, &trace);
    save_model(model, path_in(config, "model.bin"));

    json info;
    info["kind"] = ensemble_kind_name(model.kind);
    info["trees"] = model.trees.size();
    info["feature_count"] = model.feature_count;
    info["base_score"] = model.base_score;
    info["learning_rate"] = model.learning_rate;
    for (const auto& [k, v] : model.training_config) info["config"][k] = v;
    if (!model.warnings.empty()) info["warnings"] = model.warnings;
    if (!trace.round_losses.empty()) info["round_losses"] = trace.round_losses;
    write_text(path_in(config, "train_info.json"), info.dump(2) + "\n");
    guard.ok = true;
}

namespace {

struct LoadedRun {
    FeatureTable table;
    Split split;
    EnsembleModel model;
};

LoadedRun load_run(const RunConfig& config) {
    require_artifact(config, "selected.csv", "select");
    require_artifact(config, "model.bin", "train");
    LoadedRun run;
    run.table = load_with_outcome(config, "selected.csv", "selected.schema");
    run.split = load_split(config);
    run.model = load_model(path_in(config, "model.bin"));
    return run;
}

json shap_to_json(const ShapExplanation& e) { return json::parse(e.to_json()); }

std::vector<BarItem> attribution_bars(const std::vector<std::string>& names,
                                      const std::vector<double>& values, std::size_t top_k) {
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double fa = std::fabs(values[a]), fb = std::fabs(values[b]);
        if (fa != fb) return fa > fb;
        return names[a] < names[b];
    });
    std::vector<BarItem> bars;
    for (std::size_t i = 0; i < std::min(top_k, order.size()); ++i)
        bars.push_back({names[order[i]], values[order[i]]});
    return bars;
}

} // namespace

void stage_explain(const RunConfig& config) {
    config.validate();
    StageGuard guard{config, "explain"};
    LoadedRun run = load_run(config);
    const std::uint64_t seed = config.get_seed("explain.seed", 11);
    const auto& names = run.table.column_names;

    const auto bg_idx = background_indices(run.split.train_indices,
                                           config.get_count("explain.background", 100), seed);
    const auto background = rows_of(run.table, bg_idx);
    const ScoreFn score = run.model.predictor();

    // Instance ids index the test rows.
    std::vector<std::size_t> instances;
    for (const auto& item : config.get_list("explain.instances"))
        instances.push_back(std::stoul(item));
    if (instances.empty()) {
        for (std::size_t i = 0; i < std::min<std::size_t>(3, run.split.test_indices.size()); ++i)
            instances.push_back(i);
    }
    for (std::size_t id : instances)
        if (id >= run.split.test_indices.size())
            throw ConfigError("explain instance id " + std::to_string(id) +
                              " out of range; valid ids are 0.." +
                              std::to_string(run.split.test_indices.size() - 1));

    const std::size_t d = run.table.cols();
    const bool exact = d <= kShapExactLimit;
    const std::size_t permutations = config.get_count("explain.permutations", 2000);
    TrainStats stats = TrainStats::from_table(run.table.select_rows(run.split.train_indices));
    const std::size_t lime_samples =
        std::max(config.get_count("explain.lime_samples", 5000), d + 1);
    const double kernel_width = config.get_num("explain.kernel_width", 0.0);

    json shap_out, lime_out;
    for (std::size_t id : instances) {
        const std::size_t row_idx = run.split.test_indices[id];
        std::vector<double> row(d);
        for (std::size_t c = 0; c < d; ++c) row[c] = run.table.at(row_idx, c);

        ShapExplanation se = exact ? shap_exact(score, row, background)
                                   : shap_sampled(score, row, background, permutations,
                                                  mix_seed(seed, id));
        json sj = shap_to_json(se);
        sj["instance_id"] = id;
        sj["score"] = score(row);
        shap_out[std::to_string(id)] = sj;
        write_text(path_in(config, "shap_instance_" + std::to_string(id) + ".svg"),
                   signed_bar_chart_svg("shap attributions, test instance " + std::to_string(id),
                                        attribution_bars(names, se.attributions, 12), "#ff0d57",
                                        "#1e88e5"));

        LimeExplanation le =
            lime_explain(score, row, stats, lime_samples, kernel_width, mix_seed(seed, 1000 + id));
        json lj = json::parse(le.to_json());
        lj["instance_id"] = id;
        lj["score"] = score(row);
        lime_out[std::to_string(id)] = lj;
        write_text(path_in(config, "lime_instance_" + std::to_string(id) + ".svg"),
                   signed_bar_chart_svg("lime coefficients, test instance " + std::to_string(id),
                                        attribution_bars(names, le.coefficients, 12), "#2ca02c",
                                        "#d62728"));
    }
    write_text(path_in(config, "shap_explanations.json"), shap_out.dump(2) + "\n");
    write_text(path_in(config, "lime_explanations.json"), lime_out.dump(2) + "\n");

    const std::size_t summary_rows =
        std::min(config.get_count("explain.summary_rows", 40), run.split.test_indices.size());
    std::vector<std::size_t> summary_idx(run.split.test_indices.begin(),
                                         run.split.test_indices.begin() +
                                             static_cast<std::ptrdiff_t>(summary_rows));
    ShapSummaryConfig sc;
    sc.force_sampled = !exact;
    sc.permutations = config.get_count("explain.summary_permutations", 128);
    sc.seed = mix_seed(seed, 777);
    ShapSummary summary = shap_summary(score, rows_of(run.table, summary_idx), background, names, sc);
    write_text(path_in(config, "shap_summary.json"), summary.to_json() + "\n");
    std::vector<BarItem> bars;
    for (const auto& r : summary.rows) bars.push_back({r.feature, r.mean_abs_attribution});
    if (bars.size() > 20) bars.resize(20);
    write_text(path_in(config, "shap_summary.svg"),
               magnitude_bar_chart_svg("mean |shap attribution| over test rows", bars, "#ff0d57"));
    guard.ok = true;
}

void explain_instance(const RunConfig& config, std::size_t instance_id) {
    RunConfig cfg = config;
    cfg.set("explain.instances", std::to_string(instance_id));
    stage_explain(cfg);
}

void stage_metamodel(const RunConfig& config) {
    config.validate();
    StageGuard guard{config, "metamodel"};
    LoadedRun run = load_run(config);
    const std::size_t d = run.table.cols();
    const ScoreFn score = run.model.predictor();

    // Query set: the training rows plus a uniform sample over [0,1]^d.
    auto query = rows_of(run.table, run.split.train_indices);
    const std::size_t extra = config.get_count("meta.uniform_query", 1000);
    Rng rng(config.get_seed("meta.seed", 3));
    for (std::size_t i = 0; i < extra; ++i) {
        std::vector<double> row(d);
        for (auto& v : row) v = rng.uniform01();
        query.push_back(std::move(row));
    }

    MetamodelFitOptions opts;
    opts.iterations = config.get_count("meta.iterations", 2000);
    opts.step = config.get_num("meta.step", 0.1);
    opts.l1_penalty = config.get_num("meta.l1", 1e-4);
    opts.seed = config.get_seed("meta.seed", 3);

    auto basis = build_basis(d, true, true);
    auto [spec, trace] = fit_metamodel(score, query, basis, run.table.column_names, opts);

    write_text(path_in(config, "metamodel.json"), spec.to_json() + "\n");
    write_text(path_in(config, "fit_trace.json"), trace.to_json() + "\n");
    write_text(path_in(config, "metamodel_expression.txt"), render_expression(spec) + "\n");

    json rankings;
    rankings["basis_size"] = basis.size();
    rankings["features"] = json::array();
    for (const auto& [name, value] :
         rank_features(spec, config.get_count("meta.top_features", 5)))
        rankings["features"].push_back({{"feature", name}, {"coefficient_abs", value}});
    rankings["interactions"] = json::array();
    for (const auto& [name, value] :
         rank_interactions(spec, config.get_count("meta.top_interactions", 2)))
        rankings["interactions"].push_back({{"pair", name}, {"coefficient_abs", value}});
    write_text(path_in(config, "rankings.json"), rankings.dump(2) + "\n");

    const auto test_rows = rows_of(run.table, run.split.test_indices);
    std::vector<std::uint8_t> labels;
    for (std::size_t r : run.split.test_indices) labels.push_back((*run.table.outcome)[r]);
    std::vector<double> model_scores = score_batch(run.model, test_rows);
    std::vector<double> meta_scores;
    meta_scores.reserve(test_rows.size());
    for (const auto& row : test_rows) meta_scores.push_back(spec.eval(row));
    ModelComparison cmp = compare_models(
        {{ensemble_kind_name(run.model.kind), model_scores}, {"metamodel", meta_scores}}, labels);
    write_text(path_in(config, "auc_comparison.json"), cmp.to_json() + "\n");
    guard.ok = true;
}

void stage_report(const RunConfig& config) {
    config.validate();
    StageGuard guard{config, "report"};
    for (const char* name : {"preprocess_report.json", "selection_report.json",
                             "auc_comparison.json", "shap_summary.json", "shap_explanations.json",
                             "lime_explanations.json", "metamodel.json", "rankings.json"})
        require_artifact(config, name,
                         std::string(name).find("shap") != std::string::npos ||
                                 std::string(name).find("lime") != std::string::npos
                             ? "explain"
                             : "earlier stages");

    const json pre = json::parse(read_text(path_in(config, "preprocess_report.json")));
    const json sel = json::parse(read_text(path_in(config, "selection_report.json")));
    const json cmp = json::parse(read_text(path_in(config, "auc_comparison.json")));
    const json summary = json::parse(read_text(path_in(config, "shap_summary.json")));
    const json shap_exp = json::parse(read_text(path_in(config, "shap_explanations.json")));
    const json lime_exp = json::parse(read_text(path_in(config, "lime_explanations.json")));
    const MetamodelSpec spec =
        MetamodelSpec::from_json(read_text(path_in(config, "metamodel.json")));
    const json rankings = json::parse(read_text(path_in(config, "rankings.json")));

    // Re-render every SVG view from the stored JSON, no recomputation.
    std::vector<BarItem> bars;
    for (const auto& r : summary)
        bars.push_back({r.at("feature").get<std::string>(), r.at("mean_abs_attribution").get<double>()});
    if (bars.size() > 20) bars.resize(20);
    write_text(path_in(config, "shap_summary.svg"),
               magnitude_bar_chart_svg("mean |shap attribution| over test rows", bars, "#ff0d57"));

    auto rebuild_instance_svgs = [&](const json& blob, const std::string& prefix,
                                     const std::string& key, const std::string& title,
                                     const char* pos, const char* neg) {
        for (const auto& [id, e] : blob.items()) {
            const auto values = e.at(key).get<std::vector<double>>();
            std::vector<std::string> names;
            if (spec.feature_names.size() == values.size()) {
                names = spec.feature_names;
            } else {
                for (std::size_t i = 0; i < values.size(); ++i)
                    names.push_back("X" + std::to_string(i));
            }
            write_text(path_in(config, prefix + id + ".svg"),
                       signed_bar_chart_svg(title + ", test instance " + id,
                                            attribution_bars(names, values, 12), pos, neg));
        }
    };
    rebuild_instance_svgs(shap_exp, "shap_instance_", "attributions", "shap attributions",
                          "#ff0d57", "#1e88e5");
    rebuild_instance_svgs(lime_exp, "lime_instance_", "coefficients", "lime coefficients",
                          "#2ca02c", "#d62728");
    write_text(path_in(config, "metamodel_expression.txt"), render_expression(spec) + "\n");

    std::ostringstream md;
    md << "# Run report\n\n";
    md << "## Data\n\n";
    md << "- rows in: " << pre.at("rows_in") << "\n";
    md << "- rows out: " << pre.at("rows_out") << "\n";
    md << "- columns after preprocessing: " << pre.at("columns") << "\n";
    md << "- outcome positives/negatives: " << pre.at("outcome_positives") << "/"
       << pre.at("outcome_negatives") << "\n\n";
    md << "## Selection\n\n";
    md << "- rows after dropping incomplete records: " << sel.at("rows_after_drop") << "\n";
    md << "- final feature set (" << sel.at("final_columns").size() << "): ";
    for (std::size_t i = 0; i < sel.at("final_columns").size(); ++i)
        md << (i ? ", " : "") << sel.at("final_columns")[i].get<std::string>();
    md << "\n\n";
    md << "## AUC comparison (test set)\n\n";
    md << "| model | AUC |\n|---|---|\n";
    for (const auto& e : cmp.at("entries"))
        md << "| " << e.at("name").get<std::string>() << " | " << e.at("auc") << " |\n";
    md << "\n## Top features by mean |SHAP attribution|\n\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, summary.size()); ++i)
        md << i + 1 << ". " << summary[i].at("feature").get<std::string>() << " ("
           << summary[i].at("mean_abs_attribution") << ")\n";
    md << "\n## Metamodel\n\n";
    md << "```\n" << render_expression(spec) << "\n```\n\n";
    md << "Top features by |coefficient|:\n\n";
    for (const auto& f : rankings.at("features"))
        md << "- " << f.at("feature").get<std::string>() << ": " << f.at("coefficient_abs")
           << "\n";
    md << "\nTop interactions by |coefficient|:\n\n";
    for (const auto& f : rankings.at("interactions"))
        md << "- " << f.at("pair").get<std::string>() << ": " << f.at("coefficient_abs") << "\n";
    md << "\nCharts: shap_summary.svg, shap_instance_<id>.svg, lime_instance_<id>.svg\n";
    write_text(path_in(config, "report.md"), md.str());
    guard.ok = true;
}

std::string run_pipeline(const RunConfig& config) {
    config.validate();
    stage_preprocess(config);
    stage_select(config);
    stage_train(config);
    stage_explain(config);
    stage_metamodel(config);
    stage_report(config);
    return out_dir(config);
}

} // namespace xtab

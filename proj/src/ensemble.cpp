#include "xtab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "xtab/errors.hpp"
#include "xtab/rng.hpp"

namespace xtab {

const char* ensemble_kind_name(EnsembleKind kind) {
    switch (kind) {
        case EnsembleKind::bagged: return "forest";
        case EnsembleKind::boosted_leafwise: return "leafwise";
        case EnsembleKind::boosted_depthwise: return "depthwise";
    }
    return "?";
}

EnsembleKind ensemble_kind_from_name(const std::string& name) {
    if (name == "forest") return EnsembleKind::bagged;
    if (name == "leafwise") return EnsembleKind::boosted_leafwise;
    if (name == "depthwise") return EnsembleKind::boosted_depthwise;
    throw ConfigError("unknown model kind '" + name + "' (forest|leafwise|depthwise)");
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double leaf_weight(double grad_sum, double hess_sum, double l1, double l2) {
    const double denom = hess_sum + l2;
    if (denom <= 1e-12) return 0.0;
    double g = 0.0;
    if (grad_sum > l1) g = grad_sum - l1;
    else if (grad_sum < -l1) g = grad_sum + l1;
    return -g / denom;
}

double Tree::predict(const std::vector<double>& row) const {
    std::int32_t i = 0;
    while (!nodes[i].leaf)
        i = row[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
}

std::size_t Tree::leaf_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += node.leaf ? 1 : 0;
    return n;
}

double EnsembleModel::score(const std::vector<double>& row) const {
    if (width_is_exact ? row.size() != feature_count : row.size() < feature_count)
        throw DataError("score: row width " + std::to_string(row.size()) +
                        " does not match model feature count " + std::to_string(feature_count));
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(row);
    if (kind == EnsembleKind::bagged)
        return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
    return sigmoid(base_score + learning_rate * sum);
}

ScoreFn EnsembleModel::predictor() const {
    return [model = *this](const std::vector<double>& row) { return model.score(row); };
}

std::vector<double> score_batch(const EnsembleModel& model,
                                const std::vector<std::vector<double>>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(model.score(row));
    return out;
}

namespace {

struct TrainData {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> x; // row-major
    std::vector<std::uint8_t> y;

    double at(std::size_t r, std::size_t c) const { return x[r * cols + c]; }
};

TrainData extract_train_data(const FeatureTable& table) {
    if (!table.outcome) throw DataError("training requires a table with an outcome");
    if (table.rows == 0) throw DataError("training requires a nonempty table");
    for (std::size_t i = 0; i < table.missing_mask.size(); ++i)
        if (table.missing_mask[i])
            throw DataError("training data contains missing values; drop or clean rows first");
    TrainData d;
    d.rows = table.rows;
    d.cols = table.cols();
    d.x = table.values;
    d.y = *table.outcome;
    return d;
}

struct SplitCand {
    bool valid = false;
    double gain = 0.0;
    std::uint32_t feature = 0;
    double threshold = 0.0;
};

// Exact scan over sorted unique values. `stat` maps a row to the quantity
// being accumulated; `score` maps (left stats, right stats) to a gain. The
// strictly-greater acceptance plus ascending feature/threshold order realizes
// the lowest-feature / lowest-threshold tie break.
template <typename EvalSplit>
SplitCand best_split_over(const TrainData& d, const std::vector<std::size_t>& rows,
                          const std::vector<std::uint32_t>& features, EvalSplit&& eval) {
    SplitCand best;
    std::vector<std::pair<double, std::size_t>> vals(rows.size());
    for (std::uint32_t f : features) {
        for (std::size_t i = 0; i < rows.size(); ++i) vals[i] = {d.at(rows[i], f), rows[i]};
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        eval(f, vals, best);
    }
    return best;
}

// ----- random forest (Gini) ------------------------------------------------

struct ForestBuilder {
    const TrainData& d;
    std::size_t max_depth;
    std::size_t features_per_split;
    Rng& rng;
    Tree tree;

    std::vector<std::uint32_t> sample_features() {
        std::vector<std::uint32_t> all(d.cols);
        std::iota(all.begin(), all.end(), 0);
        if (features_per_split >= d.cols) return all;
        // partial Fisher-Yates, then ascending order for the tie-break scan
        for (std::size_t i = 0; i < features_per_split; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.below(d.cols - i));
            std::swap(all[i], all[j]);
        }
        all.resize(features_per_split);
        std::sort(all.begin(), all.end());
        return all;
    }

    static double gini(double pos, double n) {
        if (n <= 0.0) return 0.0;
        const double p = pos / n;
        return 1.0 - p * p - (1.0 - p) * (1.0 - p);
    }

    SplitCand find_split(const std::vector<std::size_t>& rows) {
        const double n = static_cast<double>(rows.size());
        double pos = 0.0;
        for (std::size_t r : rows) pos += d.y[r];
        if (pos == 0.0 || pos == n) return {};
        const double parent = gini(pos, n);
        auto features = sample_features();
        return best_split_over(
            d, rows, features,
            [&](std::uint32_t f, const std::vector<std::pair<double, std::size_t>>& vals,
                SplitCand& best) {
                double lpos = 0.0;
                for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                    lpos += d.y[vals[i].second];
                    if (vals[i + 1].first == vals[i].first) continue;
                    const double nl = static_cast<double>(i + 1);
                    const double nr = n - nl;
                    const double gain =
                        parent - (nl / n) * gini(lpos, nl) - (nr / n) * gini(pos - lpos, nr);
                    if (gain > best.gain + 1e-15 || (!best.valid && gain > 1e-12)) {
                        best = {true, gain, f, vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first)};
                    }
                }
            });
    }

    std::int32_t build(const std::vector<std::size_t>& rows, std::size_t depth) {
        const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        double pos = 0.0;
        for (std::size_t r : rows) pos += d.y[r];
        tree.nodes[id].value = pos / static_cast<double>(rows.size());
        if (depth >= max_depth || rows.size() < 2) return id;
        SplitCand split = find_split(rows);
        if (!split.valid) return id;
        std::vector<std::size_t> left, right;
        for (std::size_t r : rows)
            (d.at(r, split.feature) < split.threshold ? left : right).push_back(r);
        const std::int32_t l = build(left, depth + 1);
        const std::int32_t r = build(right, depth + 1);
        tree.nodes[id].leaf = false;
        tree.nodes[id].feature = split.feature;
        tree.nodes[id].threshold = split.threshold;
        tree.nodes[id].left = l;
        tree.nodes[id].right = r;
        return id;
    }
};

// ----- boosting (shared) ----------------------------------------------------

struct GradStats {
    std::vector<double> grad, hess; // per training row
};

double regularized_score(double g, double h, double l1, double l2) {
    double gg = 0.0;
    if (g > l1) gg = g - l1;
    else if (g < -l1) gg = g + l1;
    const double denom = h + l2;
    if (denom <= 1e-12) return 0.0;
    return gg * gg / denom;
}

SplitCand boosted_find_split(const TrainData& d, const std::vector<std::size_t>& rows,
                             const GradStats& gs, double l1, double l2) {
    double G = 0.0, H = 0.0;
    for (std::size_t r : rows) {
        G += gs.grad[r];
        H += gs.hess[r];
    }
    const double parent = regularized_score(G, H, l1, l2);
    std::vector<std::uint32_t> features(d.cols);
    std::iota(features.begin(), features.end(), 0);
    return best_split_over(
        d, rows, features,
        [&](std::uint32_t f, const std::vector<std::pair<double, std::size_t>>& vals,
            SplitCand& best) {
            double GL = 0.0, HL = 0.0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                GL += gs.grad[vals[i].second];
                HL += gs.hess[vals[i].second];
                if (vals[i + 1].first == vals[i].first) continue;
                const double gain = 0.5 * (regularized_score(GL, HL, l1, l2) +
                                           regularized_score(G - GL, H - HL, l1, l2) - parent);
                if (gain > best.gain + 1e-15 || (!best.valid && gain > 1e-12)) {
                    best = {true, gain, f, vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first)};
                }
            }
        });
}

struct PendingLeaf {
    std::int32_t node = -1;
    std::vector<std::size_t> rows;
    SplitCand split;
    std::size_t seq = 0; // creation order, breaks gain ties deterministically
};

Tree grow_leafwise(const TrainData& d, const GradStats& gs, std::size_t max_leaves, double l1,
                   double l2) {
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<std::size_t> all(d.rows);
    std::iota(all.begin(), all.end(), 0);

    std::vector<PendingLeaf> open;
    std::size_t seq = 0;
    open.push_back({0, std::move(all), {}, seq++});
    open.back().split = boosted_find_split(d, open.back().rows, gs, l1, l2);

    std::size_t leaves = 1;
    while (leaves < max_leaves) {
        std::size_t pick = open.size();
        for (std::size_t i = 0; i < open.size(); ++i) {
            if (!open[i].split.valid) continue;
            if (pick == open.size() || open[i].split.gain > open[pick].split.gain + 1e-15) pick = i;
        }
        if (pick == open.size()) break; // no leaf has a positive-gain split
        PendingLeaf leaf = std::move(open[pick]);
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));

        std::vector<std::size_t> lrows, rrows;
        for (std::size_t r : leaf.rows)
            (d.at(r, leaf.split.feature) < leaf.split.threshold ? lrows : rrows).push_back(r);

        const std::int32_t l = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        const std::int32_t r = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[leaf.node].leaf = false;
        tree.nodes[leaf.node].feature = leaf.split.feature;
        tree.nodes[leaf.node].threshold = leaf.split.threshold;
        tree.nodes[leaf.node].left = l;
        tree.nodes[leaf.node].right = r;

        PendingLeaf left{l, std::move(lrows), {}, seq++};
        left.split = boosted_find_split(d, left.rows, gs, l1, l2);
        PendingLeaf right{r, std::move(rrows), {}, seq++};
        right.split = boosted_find_split(d, right.rows, gs, l1, l2);
        open.push_back(std::move(left));
        open.push_back(std::move(right));
        ++leaves;
    }
    for (auto& leaf : open) {
        double G = 0.0, H = 0.0;
        for (std::size_t r : leaf.rows) {
            G += gs.grad[r];
            H += gs.hess[r];
        }
        tree.nodes[leaf.node].value = leaf_weight(G, H, l1, l2);
    }
    return tree;
}

void finalize_leaf(Tree& tree, std::int32_t node, const std::vector<std::size_t>& rows,
                   const GradStats& gs, double l1, double l2) {
    double G = 0.0, H = 0.0;
    for (std::size_t r : rows) {
        G += gs.grad[r];
        H += gs.hess[r];
    }
    tree.nodes[static_cast<std::size_t>(node)].value = leaf_weight(G, H, l1, l2);
}

Tree grow_depthwise(const TrainData& d, const GradStats& gs, std::size_t max_depth, double l1,
                    double l2) {
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<std::size_t> all(d.rows);
    std::iota(all.begin(), all.end(), 0);

    struct Item {
        std::int32_t node;
        std::vector<std::size_t> rows;
    };
    std::vector<Item> level;
    level.push_back({0, std::move(all)});

    for (std::size_t depth = 0; depth < max_depth && !level.empty(); ++depth) {
        std::vector<Item> next;
        for (auto& item : level) {
            SplitCand split = boosted_find_split(d, item.rows, gs, l1, l2);
            if (!split.valid) {
                finalize_leaf(tree, item.node, item.rows, gs, l1, l2);
                continue;
            }
            std::vector<std::size_t> lrows, rrows;
            for (std::size_t r : item.rows)
                (d.at(r, split.feature) < split.threshold ? lrows : rrows).push_back(r);
            const std::int32_t l = static_cast<std::int32_t>(tree.nodes.size());
            tree.nodes.emplace_back();
            const std::int32_t r = static_cast<std::int32_t>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes[item.node].leaf = false;
            tree.nodes[item.node].feature = split.feature;
            tree.nodes[item.node].threshold = split.threshold;
            tree.nodes[item.node].left = l;
            tree.nodes[item.node].right = r;
            next.push_back({l, std::move(lrows)});
            next.push_back({r, std::move(rrows)});
        }
        level = std::move(next);
    }
    for (auto& item : level) finalize_leaf(tree, item.node, item.rows, gs, l1, l2);
    return tree;
}

double mean_log_loss(const std::vector<double>& margin, const std::vector<std::uint8_t>& y) {
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double p = sigmoid(margin[i]);
        p = std::min(1.0 - 1e-15, std::max(1e-15, p));
        loss -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    return loss / static_cast<double>(y.size());
}

EnsembleModel fit_boosted(const FeatureTable& train, EnsembleKind kind, std::size_t rounds,
                          std::size_t leaves_or_depth, double learning_rate, double l1, double l2,
                          std::uint64_t seed, BoostTrace* trace) {
    if (rounds < 1) throw ConfigError("rounds must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw ConfigError("learning_rate must lie in (0,1]");
    if (l1 < 0.0 || l2 < 0.0) throw ConfigError("l1/l2 penalties must be >= 0");
    TrainData d = extract_train_data(train);

    EnsembleModel model;
    model.kind = kind;
    model.learning_rate = learning_rate;
    model.feature_count = d.cols;

    double pos = 0.0;
    for (auto v : d.y) pos += v;
    double p0 = pos / static_cast<double>(d.rows);
    p0 = std::min(1.0 - 1e-6, std::max(1e-6, p0));
    model.base_score = std::log(p0 / (1.0 - p0));

    std::vector<double> margin(d.rows, model.base_score);
    if (trace) trace->round_losses.push_back(mean_log_loss(margin, d.y));

    GradStats gs;
    gs.grad.resize(d.rows);
    gs.hess.resize(d.rows);
    for (std::size_t round = 0; round < rounds; ++round) {
        for (std::size_t i = 0; i < d.rows; ++i) {
            const double p = sigmoid(margin[i]);
            gs.grad[i] = p - static_cast<double>(d.y[i]);
            gs.hess[i] = p * (1.0 - p);
        }
        Tree tree = kind == EnsembleKind::boosted_leafwise
                        ? grow_leafwise(d, gs, leaves_or_depth, l1, l2)
                        : grow_depthwise(d, gs, leaves_or_depth, l1, l2);
        if (tree.nodes.size() == 1) {
            // No split with positive gain anywhere: stop boosting. A single
            // zero-value leaf keeps the tree list nonempty on round 1.
            if (round == 0) {
                model.warnings.push_back("no positive-gain split in round 1; constant model");
                if (trace) trace->warnings.push_back(model.warnings.back());
                tree.nodes[0].value = 0.0;
                model.trees.push_back(std::move(tree));
            }
            break;
        }
        for (std::size_t i = 0; i < d.rows; ++i) {
            std::vector<double> row(d.x.begin() + static_cast<std::ptrdiff_t>(i * d.cols),
                                    d.x.begin() + static_cast<std::ptrdiff_t>((i + 1) * d.cols));
            margin[i] += learning_rate * tree.predict(row);
        }
        model.trees.push_back(std::move(tree));
        if (trace) trace->round_losses.push_back(mean_log_loss(margin, d.y));
    }
    model.training_config = {{"rounds", static_cast<double>(rounds)},
                             {kind == EnsembleKind::boosted_leafwise ? "leaves" : "max_depth",
                              static_cast<double>(leaves_or_depth)},
                             {"learning_rate", learning_rate},
                             {"l1", l1},
                             {"l2", l2},
                             {"seed", static_cast<double>(seed)}};
    return model;
}

} // namespace

EnsembleModel fit_random_forest(const FeatureTable& train, std::size_t trees,
                                std::size_t max_depth, std::size_t features_per_split,
                                std::uint64_t seed) {
    if (trees < 1) throw ConfigError("forest needs at least 1 tree");
    TrainData d = extract_train_data(train);
    if (features_per_split == 0)
        features_per_split = static_cast<std::size_t>(
            std::max(1.0, std::floor(std::sqrt(static_cast<double>(d.cols)))));

    EnsembleModel model;
    model.kind = EnsembleKind::bagged;
    model.feature_count = d.cols;
    model.learning_rate = 1.0;
    model.base_score = 0.0;

    double pos = 0.0;
    for (auto v : d.y) pos += v;
    if (pos == 0.0 || pos == static_cast<double>(d.rows))
        model.warnings.push_back("outcome has a single class; model is constant");

    for (std::size_t t = 0; t < trees; ++t) {
        Rng rng(mix_seed(seed, t));
        std::vector<std::size_t> bootstrap(d.rows);
        for (auto& r : bootstrap) r = static_cast<std::size_t>(rng.below(d.rows));
        ForestBuilder builder{d, max_depth, features_per_split, rng, {}};
        builder.build(bootstrap, 0);
        model.trees.push_back(std::move(builder.tree));
    }
    model.training_config = {{"trees", static_cast<double>(trees)},
                             {"max_depth", static_cast<double>(max_depth)},
                             {"features_per_split", static_cast<double>(features_per_split)},
                             {"seed", static_cast<double>(seed)}};
    return model;
}

EnsembleModel fit_boosted_leafwise(const FeatureTable& train, std::size_t rounds,
                                   std::size_t leaves, double learning_rate, std::uint64_t seed,
                                   BoostTrace* trace) {
    if (leaves < 2) throw ConfigError("leaf budget must be >= 2");
    return fit_boosted(train, EnsembleKind::boosted_leafwise, rounds, leaves, learning_rate, 0.0,
                       0.0, seed, trace);
}

EnsembleModel fit_boosted_depthwise(const FeatureTable& train, std::size_t rounds,
                                    std::size_t max_depth, double learning_rate, double l1,
                                    double l2, std::uint64_t seed, BoostTrace* trace) {
    if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
    return fit_boosted(train, EnsembleKind::boosted_depthwise, rounds, max_depth, learning_rate,
                       l1, l2, seed, trace);
}

// ----- serialization ---------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'E', 'M', 'D', 'L'};
constexpr std::uint16_t kFormatVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw DataError("model file truncated");
    return v;
}

void write_subtree(std::ofstream& out, const Tree& tree, std::int32_t node) {
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    write_raw<std::uint8_t>(out, n.leaf ? 1 : 0);
    if (n.leaf) {
        write_raw<double>(out, n.value);
    } else {
        write_raw<std::uint32_t>(out, n.feature);
        write_raw<double>(out, n.threshold);
        write_subtree(out, tree, n.left);
        write_subtree(out, tree, n.right);
    }
}

std::int32_t read_subtree(std::ifstream& in, Tree& tree) {
    const std::uint8_t tag = read_raw<std::uint8_t>(in);
    const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (tag == 1) {
        tree.nodes[static_cast<std::size_t>(id)].value = read_raw<double>(in);
    } else if (tag == 0) {
        const std::uint32_t feature = read_raw<std::uint32_t>(in);
        const double threshold = read_raw<double>(in);
        const std::int32_t l = read_subtree(in, tree);
        const std::int32_t r = read_subtree(in, tree);
        auto& n = tree.nodes[static_cast<std::size_t>(id)];
        n.leaf = false;
        n.feature = feature;
        n.threshold = threshold;
        n.left = l;
        n.right = r;
    } else {
        throw DataError("model file corrupt: bad node tag " + std::to_string(tag));
    }
    return id;
}

} // namespace

void save_model(const EnsembleModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file '" + path + "'");
    out.write(kMagic, 4);
    write_raw<std::uint16_t>(out, kFormatVersion);
    write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(model.kind));
    write_raw<double>(out, model.learning_rate);
    write_raw<double>(out, model.base_score);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(model.trees.size()));
    for (const auto& tree : model.trees) write_subtree(out, tree, 0);
}

EnsembleModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("not a model file (bad magic)");
    const auto version = read_raw<std::uint16_t>(in);
    if (version != kFormatVersion)
        throw DataError("model format version mismatch: file has " + std::to_string(version));
    EnsembleModel model;
    const auto kind = read_raw<std::uint8_t>(in);
    if (kind > 2) throw DataError("model file corrupt: bad kind " + std::to_string(kind));
    model.kind = static_cast<EnsembleKind>(kind);
    model.learning_rate = read_raw<double>(in);
    model.base_score = read_raw<double>(in);
    const auto count = read_raw<std::uint32_t>(in);
    model.trees.reserve(count);
    for (std::uint32_t t = 0; t < count; ++t) {
        Tree tree;
        read_subtree(in, tree);
        model.trees.push_back(std::move(tree));
    }
    // The format carries no feature count; infer the minimum width the trees read.
    std::uint32_t max_feature = 0;
    bool any_internal = false;
    for (const auto& tree : model.trees)
        for (const auto& n : tree.nodes)
            if (!n.leaf) {
                any_internal = true;
                max_feature = std::max(max_feature, n.feature);
            }
    model.feature_count = any_internal ? max_feature + 1 : 0;
    model.width_is_exact = false;
    return model;
}

} // namespace xtab

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "xtab/table.hpp"

namespace xtab {

// Model-agnostic scoring contract used by every explainer.
using ScoreFn = std::function<double(const std::vector<double>&)>;

enum class EnsembleKind : std::uint8_t {
    bagged = 0,
    boosted_leafwise = 1,
    boosted_depthwise = 2,
};

const char* ensemble_kind_name(EnsembleKind kind);
EnsembleKind ensemble_kind_from_name(const std::string& name);

// Binary decision tree stored flat; node 0 is the root. Internal nodes route
// row[feature] < threshold to the left child.
struct Tree {
    struct Node {
        bool leaf = true;
        std::uint32_t feature = 0;
        double threshold = 0.0;
        double value = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };
    std::vector<Node> nodes;

    double predict(const std::vector<double>& row) const;
    std::size_t leaf_count() const;
};

// Bagged or boosted tree collection behind one [0,1] scoring contract:
// bagged -> mean of per-tree leaf class fractions, boosted -> sigmoid of
// base_score + learning_rate * sum of leaf values.
struct EnsembleModel {
    EnsembleKind kind = EnsembleKind::bagged;
    std::vector<Tree> trees;
    double learning_rate = 1.0;
    double base_score = 0.0;
    std::size_t feature_count = 0;
    bool width_is_exact = true; // false after load: width was inferred from the trees
    std::map<std::string, double> training_config;
    std::vector<std::string> warnings; // not serialized

    double score(const std::vector<double>& row) const;
    ScoreFn predictor() const;
};

// Per-round training diagnostics for the boosted kinds.
struct BoostTrace {
    std::vector<double> round_losses; // mean train log-loss; entry 0 = base model
    std::vector<std::string> warnings;
};

// Bootstrap-resampled Gini trees; score is the mean leaf class fraction.
EnsembleModel fit_random_forest(const FeatureTable& train, std::size_t trees,
                                std::size_t max_depth, std::size_t features_per_split,
                                std::uint64_t seed);

// Newton boosting on log-loss; each tree grows by splitting the leaf with the
// largest gain until the leaf budget is reached.
EnsembleModel fit_boosted_leafwise(const FeatureTable& train, std::size_t rounds,
                                   std::size_t leaves, double learning_rate, std::uint64_t seed,
                                   BoostTrace* trace = nullptr);

// Newton boosting with L1/L2-regularized leaf weights; trees grow level by
// level to max_depth.
EnsembleModel fit_boosted_depthwise(const FeatureTable& train, std::size_t rounds,
                                    std::size_t max_depth, double learning_rate, double l1,
                                    double l2, std::uint64_t seed, BoostTrace* trace = nullptr);

std::vector<double> score_batch(const EnsembleModel& model,
                                const std::vector<std::vector<double>>& rows);

// Little-endian binary model file, magic "EMDL".
void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(const std::string& path);

double sigmoid(double x);

// Regularized Newton leaf weight: -soft_threshold(G, l1) / (H + l2).
double leaf_weight(double grad_sum, double hess_sum, double l1, double l2);

} // namespace xtab

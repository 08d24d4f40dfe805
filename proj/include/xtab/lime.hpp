#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xtab/ensemble.hpp"

namespace xtab {

// Per-feature perturbation law: numeric features get a normal kick with the
// training standard deviation, binary features a 0.25-probability flip.
struct TrainStats {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<std::uint8_t> is_binary;

    static TrainStats from_table(const FeatureTable& table);
};

struct LimeExplanation {
    double intercept = 0.0;
    std::vector<double> coefficients;
    double kernel_width = 0.0;
    double surrogate_r2 = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<double> instance;
    std::vector<std::string> notes;

    std::string to_json() const;
};

// Perturbation matrix around one instance; row 0 is the unperturbed instance,
// numeric draws are clipped to [0,1]. Zero-std features stay fixed.
std::vector<std::vector<double>> perturb(const std::vector<double>& instance,
                                         const TrainStats& stats, std::size_t n,
                                         std::uint64_t seed);

// Proximity weight of a perturbed row: exp(-dist^2 / width^2), Euclidean
// distance in the normalized feature space.
double proximity_weight(const std::vector<double>& a, const std::vector<double>& b, double width);

// 0.75 * sqrt(d), the pinned default.
double default_kernel_width(std::size_t d);

// Weighted least-squares linear surrogate of the model around the instance.
LimeExplanation lime_explain(const ScoreFn& model, const std::vector<double>& instance,
                             const TrainStats& stats, std::size_t n, double kernel_width,
                             std::uint64_t seed);

} // namespace xtab

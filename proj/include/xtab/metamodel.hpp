#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xtab/ensemble.hpp"

namespace xtab {

// One polynomial term: a coefficient times at most two factors X_i^e with
// exponents restricted to {1, 3}.
struct Monomial {
    std::vector<std::pair<std::size_t, int>> factors; // (feature index, exponent)
    double coefficient = 0.0;

    double eval(const std::vector<double>& x) const;
    std::string label(const std::vector<std::string>& names = {}) const;
};

// Global white-box surrogate g(x) = 1/(scale * e^{p(x)}) where p is the sum
// of the monomial terms.
struct MetamodelSpec {
    double scale = 1.0;
    std::vector<Monomial> terms;
    std::vector<std::string> feature_names;

    double eval(const std::vector<double>& x) const;
    ScoreFn predictor() const;
    std::string to_json() const;
    static MetamodelSpec from_json(const std::string& text);
};

struct FitTrace {
    std::vector<double> losses;                             // MSE per accepted iteration
    std::vector<std::pair<std::size_t, double>> step_schedule; // (iteration, step) changes
    double final_gradient_norm = 0.0;
    std::size_t divergence_restarts = 0;

    std::string to_json() const;
};

struct MetamodelFitOptions {
    std::size_t iterations = 2000;
    double step = 0.1;
    double l1_penalty = 1e-4;
    std::uint64_t seed = 0;
};

// All d linear terms, then all d(d-1)/2 unordered X_i^3 X_j^3 pairs in
// lexicographic order; coefficients zero.
std::vector<Monomial> build_basis(std::size_t d, bool include_linear,
                                  bool include_cubic_interactions);

// Fits scale and coefficients to the queried black-box scores by full-batch
// gradient descent on the mean squared error, with an optional proximal L1
// step. Steps that fail to decrease the objective are retried at half the
// step size; non-finite losses restart from the last finite iterate (at most
// 10 restarts).
std::pair<MetamodelSpec, FitTrace> fit_metamodel(const ScoreFn& model,
                                                 const std::vector<std::vector<double>>& query_rows,
                                                 const std::vector<Monomial>& basis,
                                                 const std::vector<std::string>& feature_names,
                                                 const MetamodelFitOptions& opts = {});

// Canonical text form `1/(C·e^{...})`, terms by descending |coefficient|,
// exact zeros suppressed, fixed decimal precision.
std::string render_expression(const MetamodelSpec& spec, int precision = 4);

// Inverse of render_expression (feature names default to X<i>).
MetamodelSpec parse_expression(const std::string& text);

// Per-feature |coefficient| of the linear terms, descending (ties by name).
std::vector<std::pair<std::string, double>> rank_features(const MetamodelSpec& spec,
                                                          std::size_t top_k);

// Pairwise interaction terms by |coefficient|, descending (ties by name pair).
std::vector<std::pair<std::string, double>> rank_interactions(const MetamodelSpec& spec,
                                                              std::size_t top_k);

} // namespace xtab

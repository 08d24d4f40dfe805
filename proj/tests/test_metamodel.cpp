#include <cmath>

#include <doctest.h>

#include "xtab/errors.hpp"
#include "xtab/metamodel.hpp"
#include "xtab/rng.hpp"

using namespace xtab;

namespace {

std::vector<std::vector<double>> unit_cube_sample(Rng& rng, std::size_t n, std::size_t d) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& row : rows)
        for (auto& v : row) v = rng.uniform01();
    return rows;
}

double loss_at(const ScoreFn& model, const std::vector<std::vector<double>>& rows,
               const std::vector<Monomial>& basis, const std::vector<double>& w, double log_c) {
    double s = 0.0;
    for (const auto& row : rows) {
        double p = log_c;
        for (std::size_t t = 0; t < basis.size(); ++t) p += w[t] * basis[t].eval(row);
        const double g = std::exp(-p);
        s += (g - model(row)) * (g - model(row));
    }
    return s / static_cast<double>(rows.size());
}

} // namespace

TEST_CASE("build_basis enumerates linear terms then lexicographic cubic pairs") {
    auto basis = build_basis(3, true, true);
    REQUIRE(basis.size() == 6);
    CHECK(basis[0].label() == "X0");
    CHECK(basis[1].label() == "X1");
    CHECK(basis[2].label() == "X2");
    CHECK(basis[3].label() == "X0^3*X1^3");
    CHECK(basis[4].label() == "X0^3*X2^3");
    CHECK(basis[5].label() == "X1^3*X2^3");
}

TEST_CASE("basis for 20 features has 210 terms") {
    CHECK(build_basis(20, true, true).size() == 210);
}

TEST_CASE("interaction-only basis of one feature is empty") {
    CHECK(build_basis(1, false, true).empty());
}

TEST_CASE("fit recovers a black box that lives inside the model family") {
    // target: g*(x) = 1/(2 e^{x0 - x1})
    ScoreFn target = [](const std::vector<double>& x) {
        return 1.0 / (2.0 * std::exp(x[0] - x[1]));
    };
    Rng rng(99);
    auto query = unit_cube_sample(rng, 500, 2);
    auto basis = build_basis(2, true, true);
    MetamodelFitOptions opts;
    opts.iterations = 20000;
    opts.step = 0.5;
    opts.l1_penalty = 0.0;
    auto [spec, trace] = fit_metamodel(target, query, basis, {"X0", "X1"}, opts);

    CHECK(std::fabs(spec.scale - 2.0) <= 0.04); // within 2%
    CHECK(std::fabs(spec.terms[0].coefficient - 1.0) <= 0.02);
    CHECK(std::fabs(spec.terms[1].coefficient + 1.0) <= 0.02);
    CHECK(std::fabs(spec.terms[2].coefficient) <= 0.02);
    CHECK(trace.losses.back() <= 1e-6);
}

TEST_CASE("fit of a constant black box returns the reciprocal scale") {
    const double v = 0.37;
    ScoreFn constant = [v](const std::vector<double>&) { return v; };
    Rng rng(5);
    auto query = unit_cube_sample(rng, 200, 3);
    auto basis = build_basis(3, true, true);
    MetamodelFitOptions opts;
    opts.iterations = 5000;
    opts.l1_penalty = 1e-4;
    auto [spec, trace] = fit_metamodel(constant, query, basis, {}, opts);
    CHECK(std::fabs(spec.scale - 1.0 / v) <= 0.01 / v); // within 1%
    for (const auto& t : spec.terms) CHECK(std::fabs(t.coefficient) <= 0.01);
}

TEST_CASE("analytic loss gradient matches central finite differences") {
    Rng rng(7);
    auto query = unit_cube_sample(rng, 60, 2);
    auto basis = build_basis(2, true, true);
    ScoreFn target = [](const std::vector<double>& x) { return 0.2 + 0.5 * x[0] * x[1]; };

    std::vector<double> w = {0.3, -0.2, 0.1};
    const double log_c = 0.15;
    const std::size_t n = query.size();

    // analytic gradient, same formulas the fitter uses
    std::vector<double> grad(basis.size() + 1, 0.0); // last slot = logC
    for (const auto& row : query) {
        double p = log_c;
        for (std::size_t t = 0; t < basis.size(); ++t) p += w[t] * basis[t].eval(row);
        const double g = std::exp(-p);
        const double common = -2.0 * (g - target(row)) * g / static_cast<double>(n);
        for (std::size_t t = 0; t < basis.size(); ++t) grad[t] += common * basis[t].eval(row);
        grad.back() += common;
    }

    const double h = 1e-6;
    for (std::size_t t = 0; t <= basis.size(); ++t) {
        auto wp = w;
        auto wm = w;
        double cp = log_c, cm = log_c;
        if (t < basis.size()) {
            wp[t] += h;
            wm[t] -= h;
        } else {
            cp += h;
            cm -= h;
        }
        const double fd =
            (loss_at(target, query, basis, wp, cp) - loss_at(target, query, basis, wm, cm)) /
            (2.0 * h);
        CHECK(std::fabs(fd - grad[t]) <= 1e-6 * std::max(1.0, std::fabs(grad[t])));
    }
}

TEST_CASE("recorded losses never increase between accepted iterations") {
    Rng rng(17);
    auto query = unit_cube_sample(rng, 150, 3);
    ScoreFn bumpy = [](const std::vector<double>& x) {
        return 0.1 + 0.8 * (x[0] > 0.5 ? 1.0 : 0.0) * x[1];
    };
    MetamodelFitOptions opts;
    opts.iterations = 400;
    opts.step = 2.0; // deliberately hot start: exercise step halving
    opts.l1_penalty = 0.0;
    auto [spec, trace] = fit_metamodel(bumpy, query, build_basis(3, true, true), {}, opts);
    REQUIRE(trace.losses.size() >= 2);
    for (std::size_t i = 1; i < trace.losses.size(); ++i)
        CHECK(trace.losses[i] <= trace.losses[i - 1] + 1e-15);
    CHECK(std::isfinite(trace.final_gradient_norm));
}

TEST_CASE("query rows outside the unit cube are rejected") {
    ScoreFn f = [](const std::vector<double>&) { return 0.5; };
    std::vector<std::vector<double>> bad = {{0.5, 1.2}};
    CHECK_THROWS_AS(fit_metamodel(f, bad, build_basis(2, true, false), {}), DataError);
}

TEST_CASE("g stays positive and bounded by 1 for non-negative coefficients with C >= 1") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        MetamodelSpec spec;
        spec.scale = 1.0 + rng.uniform01() * 4.0;
        spec.terms = build_basis(3, true, true);
        for (auto& t : spec.terms) t.coefficient = rng.uniform01() * 2.0;
        for (int i = 0; i < 50; ++i) {
            std::vector<double> x = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
            const double g = spec.eval(x);
            CHECK(g > 0.0);
            CHECK(g <= 1.0);
            CHECK(std::isfinite(g));
        }
    }
}

TEST_CASE("render_expression formats the constant model") {
    MetamodelSpec spec;
    spec.scale = 2.0;
    CHECK(render_expression(spec) == "1/(2.0000·e^{0})");
}

TEST_CASE("render_expression formats a single interaction term") {
    MetamodelSpec spec;
    spec.scale = 5.63;
    spec.terms = {{{{0, 3}, {1, 3}}, 0.2293}};
    CHECK(render_expression(spec) == "1/(5.6300·e^{0.2293·X0^3·X1^3})");
}

TEST_CASE("terms render by descending magnitude with signs inline") {
    MetamodelSpec spec;
    spec.scale = 1.0;
    spec.terms = {{{{0, 1}}, -0.0007}, {{{1, 1}}, 0.5}, {{{2, 1}}, 0.0}};
    CHECK(render_expression(spec) == "1/(1.0000·e^{0.5000·X1 - 0.0007·X0})");
}

TEST_CASE("render -> parse -> render is a fixed point and preserves g pointwise") {
    Rng rng(31);
    MetamodelSpec spec;
    spec.scale = 0.8 + rng.uniform01() * 3.0;
    spec.terms = build_basis(4, true, true);
    for (auto& t : spec.terms) t.coefficient = rng.uniform(-2.0, 2.0);
    spec.terms[2].coefficient = 0.0; // exercise zero suppression

    const std::string text = render_expression(spec, 17);
    MetamodelSpec parsed = parse_expression(text);
    CHECK(render_expression(parsed, 17) == text);

    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform01();
        const double a = spec.eval(x);
        const double b = parsed.eval(x);
        CHECK(std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a)));
    }
}

TEST_CASE("spec json round trip") {
    MetamodelSpec spec;
    spec.scale = 2.5;
    spec.terms = {{{{0, 1}}, 0.25}, {{{0, 3}, {2, 3}}, -0.75}};
    spec.feature_names = {"A", "B", "C"};
    MetamodelSpec back = MetamodelSpec::from_json(spec.to_json());
    CHECK(back.scale == spec.scale);
    REQUIRE(back.terms.size() == 2);
    CHECK(back.terms[1].coefficient == -0.75);
    CHECK(back.feature_names == spec.feature_names);
}

TEST_CASE("rank_features orders linear coefficients by magnitude") {
    MetamodelSpec spec;
    spec.scale = 1.0;
    spec.terms = {{{{2, 1}}, -0.5}, {{{7, 1}}, 0.1}, {{{2, 3}, {7, 3}}, 9.0}};
    spec.feature_names = std::vector<std::string>(8, "");
    for (std::size_t i = 0; i < 8; ++i) spec.feature_names[i] = "X" + std::to_string(i);
    auto ranked = rank_features(spec, 5);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].first == "X2");
    CHECK(ranked[0].second == 0.5);
    CHECK(ranked[1].first == "X7");
}

TEST_CASE("rank_interactions covers only pair terms and honors top_k") {
    MetamodelSpec spec;
    spec.scale = 1.0;
    spec.terms = build_basis(4, true, true);
    SUBCASE("all-zero coefficients still enumerate pairs") {
        auto ranked = rank_interactions(spec, 2);
        CHECK(ranked.size() == 2);
    }
    SUBCASE("no interaction terms -> empty list") {
        spec.terms = build_basis(4, true, false);
        CHECK(rank_interactions(spec, 3).empty());
    }
    SUBCASE("the strongest pair ranks first") {
        spec.terms[4].coefficient = -3.0; // X0^3 X1^3 is index 4 in a d=4 basis
        spec.terms[5].coefficient = 1.0;
        auto ranked = rank_interactions(spec, 2);
        REQUIRE(ranked.size() == 2);
        CHECK(ranked[0].first == "X0*X1");
        CHECK(ranked[0].second == 3.0);
    }
}

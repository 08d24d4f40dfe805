#include "xtab/metamodel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "xtab/errors.hpp"

namespace xtab {

using nlohmann::json;

double Monomial::eval(const std::vector<double>& x) const {
    double v = 1.0;
    for (const auto& [idx, exp] : factors) {
        const double f = x[idx];
        v *= exp == 3 ? f * f * f : (exp == 1 ? f : std::pow(f, exp));
    }
    return v;
}

std::string Monomial::label(const std::vector<std::string>& names) const {
    std::string out;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += "*";
        const auto& [idx, exp] = factors[i];
        out += idx < names.size() ? names[idx] : "X" + std::to_string(idx);
        if (exp != 1) out += "^" + std::to_string(exp);
    }
    return out.empty() ? "1" : out;
}

double MetamodelSpec::eval(const std::vector<double>& x) const {
    double p = 0.0;
    for (const auto& t : terms) p += t.coefficient * t.eval(x);
    return std::exp(-p) / scale;
}

ScoreFn MetamodelSpec::predictor() const {
    return [spec = *this](const std::vector<double>& x) { return spec.eval(x); };
}

std::string MetamodelSpec::to_json() const {
    json j;
    j["scale"] = scale;
    j["terms"] = json::array();
    for (const auto& t : terms) {
        json factors = json::array();
        for (const auto& [idx, exp] : t.factors) factors.push_back({idx, exp});
        j["terms"].push_back({{"factors", factors}, {"coeff", t.coefficient}});
    }
    j["feature_names"] = feature_names;
    return j.dump(2);
}

MetamodelSpec MetamodelSpec::from_json(const std::string& text) {
    json j = json::parse(text);
    MetamodelSpec spec;
    spec.scale = j.at("scale").get<double>();
    for (const auto& t : j.at("terms")) {
        Monomial m;
        m.coefficient = t.at("coeff").get<double>();
        for (const auto& f : t.at("factors"))
            m.factors.emplace_back(f.at(0).get<std::size_t>(), f.at(1).get<int>());
        spec.terms.push_back(std::move(m));
    }
    if (j.contains("feature_names"))
        spec.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    return spec;
}

std::string FitTrace::to_json() const {
    json j;
    j["losses"] = losses;
    j["step_schedule"] = json::array();
    for (const auto& [it, step] : step_schedule) j["step_schedule"].push_back({it, step});
    j["final_gradient_norm"] = final_gradient_norm;
    j["divergence_restarts"] = divergence_restarts;
    return j.dump(2);
}

std::vector<Monomial> build_basis(std::size_t d, bool include_linear,
                                  bool include_cubic_interactions) {
    if (d < 1) throw ConfigError("basis needs at least one feature");
    std::vector<Monomial> basis;
    if (include_linear)
        for (std::size_t i = 0; i < d; ++i) basis.push_back({{{i, 1}}, 0.0});
    if (include_cubic_interactions)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) basis.push_back({{{i, 3}, {j, 3}}, 0.0});
    return basis;
}

namespace {

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

} // namespace

std::pair<MetamodelSpec, FitTrace> fit_metamodel(const ScoreFn& model,
                                                 const std::vector<std::vector<double>>& query_rows,
                                                 const std::vector<Monomial>& basis,
                                                 const std::vector<std::string>& feature_names,
                                                 const MetamodelFitOptions& opts) {
    if (opts.iterations < 1) throw ConfigError("fit_metamodel needs iterations >= 1");
    if (query_rows.empty()) throw DataError("fit_metamodel needs query rows");
    for (const auto& row : query_rows)
        for (double v : row)
            if (!(v >= 0.0 && v <= 1.0))
                throw DataError("fit_metamodel: query rows must lie in [0,1]^d");

    const std::size_t n = query_rows.size();
    const std::size_t k = basis.size();

    std::vector<double> target(n);
    for (std::size_t r = 0; r < n; ++r) target[r] = model(query_rows[r]);

    // Monomial design matrix, computed once.
    std::vector<double> design(n * k);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t t = 0; t < k; ++t) design[r * k + t] = basis[t].eval(query_rows[r]);

    std::vector<double> w(k, 0.0);
    double log_c = 0.0;

    auto surrogate = [&](const std::vector<double>& weights, double lc,
                         std::vector<double>& g_out) {
        for (std::size_t r = 0; r < n; ++r) {
            double p = lc;
            const double* row = design.data() + r * k;
            for (std::size_t t = 0; t < k; ++t) p += weights[t] * row[t];
            g_out[r] = std::exp(-p);
        }
    };
    auto mse = [&](const std::vector<double>& g) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += (g[r] - target[r]) * (g[r] - target[r]);
        return s / static_cast<double>(n);
    };
    auto l1_norm = [&](const std::vector<double>& weights) {
        double s = 0.0;
        for (double v : weights) s += std::fabs(v);
        return s;
    };

    std::vector<double> g(n), g_cand(n);
    surrogate(w, log_c, g);
    double loss = mse(g);
    double objective = loss + opts.l1_penalty * l1_norm(w);

    FitTrace trace;
    trace.losses.push_back(loss);
    double step = opts.step;
    trace.step_schedule.emplace_back(0, step);

    std::vector<double> grad_w(k);
    double grad_c = 0.0;
    std::vector<double> w_cand(k);

    for (std::size_t iter = 0; iter < opts.iterations; ++iter) {
        // dMSE/dw_t = (2/n) sum_r (g_r - y_r) * (-g_r) * M_rt ; dMSE/dlogC likewise.
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        grad_c = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double common = -2.0 * (g[r] - target[r]) * g[r] / static_cast<double>(n);
            grad_c += common;
            const double* row = design.data() + r * k;
            for (std::size_t t = 0; t < k; ++t) grad_w[t] += common * row[t];
        }

        bool accepted = false;
        while (!accepted) {
            for (std::size_t t = 0; t < k; ++t)
                w_cand[t] = soft_threshold(w[t] - step * grad_w[t], step * opts.l1_penalty);
            const double log_c_cand = log_c - step * grad_c;
            surrogate(w_cand, log_c_cand, g_cand);
            const double loss_cand = mse(g_cand);
            const double obj_cand = loss_cand + opts.l1_penalty * l1_norm(w_cand);
            if (!std::isfinite(loss_cand)) {
                ++trace.divergence_restarts;
                if (trace.divergence_restarts > 10)
                    throw NumericError("fit_metamodel: diverged despite 10 step reductions");
                step *= 0.5;
                trace.step_schedule.emplace_back(iter + 1, step);
                continue;
            }
            if (obj_cand <= objective + 1e-15) {
                w = w_cand;
                log_c = log_c_cand;
                g = g_cand;
                loss = loss_cand;
                objective = obj_cand;
                accepted = true;
            } else {
                step *= 0.5;
                trace.step_schedule.emplace_back(iter + 1, step);
                if (step < 1e-18) break; // no descent direction left at double precision
            }
        }
        if (!accepted) break;
        trace.losses.push_back(loss);
    }

    double gnorm = grad_c * grad_c;
    for (double v : grad_w) gnorm += v * v;
    trace.final_gradient_norm = std::sqrt(gnorm);

    MetamodelSpec spec;
    spec.scale = std::exp(log_c);
    spec.terms = basis;
    for (std::size_t t = 0; t < k; ++t) spec.terms[t].coefficient = w[t];
    spec.feature_names = feature_names;
    return {std::move(spec), std::move(trace)};
}

namespace {

std::string format_fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

std::string term_text(const Monomial& t, int precision) {
    std::string out = format_fixed(std::fabs(t.coefficient), precision);
    for (const auto& [idx, exp] : t.factors) {
        out += "·X" + std::to_string(idx);
        if (exp != 1) out += "^" + std::to_string(exp);
    }
    return out;
}

} // namespace

std::string render_expression(const MetamodelSpec& spec, int precision) {
    std::vector<const Monomial*> ordered;
    for (const auto& t : spec.terms)
        if (t.coefficient != 0.0) ordered.push_back(&t);
    std::stable_sort(ordered.begin(), ordered.end(), [](const Monomial* a, const Monomial* b) {
        return std::fabs(a->coefficient) > std::fabs(b->coefficient);
    });

    std::string poly;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const Monomial& t = *ordered[i];
        if (i == 0) {
            if (t.coefficient < 0.0) poly += "-";
        } else {
            poly += t.coefficient < 0.0 ? " - " : " + ";
        }
        poly += term_text(t, precision);
    }
    if (poly.empty()) poly = "0";
    return "1/(" + format_fixed(spec.scale, precision) + "·e^{" + poly + "})";
}

namespace {

struct Cursor {
    const std::string& s;
    std::size_t pos = 0;

    bool eat(const std::string& token) {
        if (s.compare(pos, token.size(), token) == 0) {
            pos += token.size();
            return true;
        }
        return false;
    }
    void expect(const std::string& token) {
        if (!eat(token))
            throw DataError("expression parse error at offset " + std::to_string(pos) +
                            ": expected '" + token + "'");
    }
    double number() {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
            throw DataError("expression parse error at offset " + std::to_string(pos) +
                            ": expected a number");
        }
        pos += used;
        return v;
    }
    std::size_t integer() {
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start)
            throw DataError("expression parse error at offset " + std::to_string(pos) +
                            ": expected an integer");
        return static_cast<std::size_t>(std::stoull(s.substr(start, pos - start)));
    }
};

} // namespace

MetamodelSpec parse_expression(const std::string& text) {
    Cursor cur{text};
    cur.expect("1/(");
    MetamodelSpec spec;
    spec.scale = cur.number();
    cur.expect("·e^{");

    if (!cur.eat("0}")) {
        bool first = true;
        while (true) {
            double sign = 1.0;
            if (first) {
                if (cur.eat("-")) sign = -1.0;
            } else if (cur.eat(" + ")) {
                sign = 1.0;
            } else if (cur.eat(" - ")) {
                sign = -1.0;
            } else {
                break;
            }
            first = false;
            Monomial term;
            term.coefficient = sign * cur.number();
            while (cur.eat("·X")) {
                std::size_t idx = cur.integer();
                int exp = 1;
                if (cur.eat("^")) exp = static_cast<int>(cur.integer());
                term.factors.emplace_back(idx, exp);
            }
            spec.terms.push_back(std::move(term));
        }
        cur.expect("}");
    }
    cur.expect(")");

    std::size_t max_idx = 0;
    bool any = false;
    for (const auto& t : spec.terms)
        for (const auto& factor : t.factors) {
            max_idx = std::max(max_idx, factor.first);
            any = true;
        }
    if (any)
        for (std::size_t i = 0; i <= max_idx; ++i)
            spec.feature_names.push_back("X" + std::to_string(i));
    return spec;
}

namespace {

std::vector<std::pair<std::string, double>> take_top(
    std::vector<std::pair<std::string, double>> items, std::size_t top_k) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (items.size() > top_k) items.resize(top_k);
    return items;
}

} // namespace

std::vector<std::pair<std::string, double>> rank_features(const MetamodelSpec& spec,
                                                          std::size_t top_k) {
    if (top_k < 1) throw ConfigError("rank_features needs top_k >= 1");
    std::vector<std::pair<std::string, double>> items;
    for (const auto& t : spec.terms) {
        if (t.factors.size() != 1 || t.factors[0].second != 1) continue;
        const std::size_t idx = t.factors[0].first;
        const std::string name = idx < spec.feature_names.size() ? spec.feature_names[idx]
                                                                 : "X" + std::to_string(idx);
        items.emplace_back(name, std::fabs(t.coefficient));
    }
    return take_top(std::move(items), top_k);
}

std::vector<std::pair<std::string, double>> rank_interactions(const MetamodelSpec& spec,
                                                              std::size_t top_k) {
    if (top_k < 1) throw ConfigError("rank_interactions needs top_k >= 1");
    std::vector<std::pair<std::string, double>> items;
    for (const auto& t : spec.terms) {
        if (t.factors.size() != 2) continue;
        auto name_of = [&](std::size_t idx) {
            return idx < spec.feature_names.size() ? spec.feature_names[idx]
                                                   : "X" + std::to_string(idx);
        };
        items.emplace_back(name_of(t.factors[0].first) + "*" + name_of(t.factors[1].first),
                           std::fabs(t.coefficient));
    }
    return take_top(std::move(items), top_k);
}

} // namespace xtab

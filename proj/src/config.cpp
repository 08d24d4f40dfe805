#include "xtab/config.hpp"

#include <fstream>

#include "xtab/errors.hpp"
#include "xtab/rng.hpp"

namespace xtab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

RunConfig::RunConfig() = default;

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + " is not 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + " has an empty key");
        cfg.kv_[key] = value;
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) { kv_[key] = value; }

bool RunConfig::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string RunConfig::get(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required config key '" + key + "'");
    return it->second;
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double RunConfig::get_num(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        std::size_t used = 0;
        double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a number: '" + it->second + "'");
    }
}

std::size_t RunConfig::get_count(const std::string& key, std::size_t fallback) const {
    double v = get_num(key, static_cast<double>(fallback));
    if (v < 0.0) throw ConfigError("config key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::get_seed(const std::string& key, std::uint64_t fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a seed: '" + it->second + "'");
    }
}

bool RunConfig::get_flag(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: '" + it->second + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key, char sep) const {
    std::vector<std::string> out;
    auto it = kv_.find(key);
    if (it == kv_.end() || it->second.empty()) return out;
    std::string cur;
    for (char ch : it->second) {
        if (ch == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

void RunConfig::derive_seeds(std::uint64_t master) {
    const std::pair<const char*, std::uint64_t> streams[] = {
        {"synth.seed", 1}, {"split.seed", 2}, {"model.seed", 3},
        {"explain.seed", 4}, {"meta.seed", 5},
    };
    for (const auto& [key, stream] : streams)
        kv_[key] = std::to_string(mix_seed(master, stream));
}

void RunConfig::validate() const {
    const bool synth = get_flag("data.synth", false);
    const bool csv = has("data.csv") && !get("data.csv", "").empty();
    if (synth == csv)
        throw ConfigError("exactly one data source required: set data.csv or data.synth=true");
    if (csv && get("data.schema", "").empty())
        throw ConfigError("csv input requires data.schema");

    const double missing = get_num("select.missing_threshold", 0.2);
    if (missing < 0.0 || missing > 1.0)
        throw ConfigError("select.missing_threshold must lie in [0,1]");
    const double dominance = get_num("select.dominance", 0.9);
    if (!(dominance > 0.0 && dominance <= 1.0))
        throw ConfigError("select.dominance must lie in (0,1]");
    const double corr = get_num("select.correlation_threshold", 0.8);
    if (!(corr > 0.0 && corr <= 1.0))
        throw ConfigError("select.correlation_threshold must lie in (0,1]");
    if (get_count("select.top_k", 20) < 1) throw ConfigError("select.top_k must be >= 1");
    const double fraction = get_num("split.fraction", 0.7);
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("split.fraction must lie in (0,1)");
    const std::string kind = get("model.kind", "forest");
    if (kind != "forest" && kind != "leafwise" && kind != "depthwise")
        throw ConfigError("model.kind must be forest|leafwise|depthwise");
    if (!synth) {
        const bool severity = !get("pipeline.severity", "").empty();
        const bool outcome_col = !get("pipeline.outcome_column", "").empty();
        if (severity == outcome_col)
            throw ConfigError(
                "csv input needs exactly one of pipeline.severity or pipeline.outcome_column");
    }
}

} // namespace xtab

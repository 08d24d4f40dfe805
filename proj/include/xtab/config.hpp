#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace xtab {

// Flat key-value run configuration with dotted section keys. Values from a
// config file can be overridden one key at a time (command-line flags win).
class RunConfig {
public:
    RunConfig();

    static RunConfig from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_num(const std::string& key, double fallback) const;
    std::size_t get_count(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
    bool get_flag(const std::string& key, bool fallback) const;

    // Splits a list value on the given separator; empty value -> empty list.
    std::vector<std::string> get_list(const std::string& key, char sep = ',') const;

    // Applies one master seed to every stage seed key (derived streams).
    void derive_seeds(std::uint64_t master);

    // Throws ConfigError when thresholds leave their documented ranges or the
    // data source is not exactly one of {csv, synth}.
    void validate() const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

} // namespace xtab

#pragma once

#include <stdexcept>
#include <string>

namespace xtab {

// Error categories map 1:1 onto CLI exit codes (see tools/).
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad run configuration / unusable parameter combination. Exit code 2.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Unreadable, malformed or contract-violating input data. Exit code 3.
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numerical failure: divergence, undefined metric, series breakdown. Exit code 4.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

} // namespace xtab

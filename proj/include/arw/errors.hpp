#pragma once

#include <stdexcept>
#include <string>

namespace arw {

/// Bad configuration / invalid input (CLI exit code 4).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: non-convergence, overflow, insufficient tail data
/// (CLI exit code 3).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace arw

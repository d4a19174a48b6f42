#pragma once

#include <stdexcept>
#include <string>

namespace fflab {

/// Raised whenever a degree, comparison or measure cannot be certified from
/// the known coefficients. Never swallowed silently.
class PrecisionInsufficient : public std::runtime_error {
public:
    explicit PrecisionInsufficient(const std::string& what)
        : std::runtime_error("precision insufficient: " + what) {}
};

/// Invalid mathematical input (inverse of zero, parameter outside its range, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Invalid configuration (reducible modulus, malformed file, ...).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace fflab

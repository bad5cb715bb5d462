#pragma once

#include <stdexcept>
#include <string>

namespace depbound {

/// Dependence information that no quasi-copula can satisfy.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver stopped at its iteration cap (raised only in strict mode).
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace depbound

#pragma once

#include <stdexcept>
#include <string>

namespace dqlg {

/// Input outside the mathematical domain of an operation (exit code 3).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Enumeration would exceed the configured size bound.
class EnumerationBoundError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Malformed, mistyped or out-of-range configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Filesystem or stream failure (exit code 4).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dqlg

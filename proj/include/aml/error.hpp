#pragma once

#include <stdexcept>
#include <string>

namespace aml {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Not enough samples or observations to compute a statistic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Vector or matrix dimensions disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration. `field` names the offending key path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace aml

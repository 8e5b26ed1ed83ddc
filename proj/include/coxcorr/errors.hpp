#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace coxcorr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (negative mean,
/// zero scale, invalid confidence level, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inputs whose shapes disagree (path length vs design, ...).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Bandwidth that leaves no grid interval inside the kernel window.
class BandwidthError : public Error {
public:
    using Error::Error;
};

/// Data or model for which the correlation is undefined (S11*S22 == 0,
/// U11*U22 == 0).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value; `key()` is the dotted path of the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key + ": " + what), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Malformed input file.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace coxcorr

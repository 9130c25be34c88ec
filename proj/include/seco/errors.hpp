#pragma once

#include <stdexcept>
#include <string>

namespace seco {

// Base class for all engine errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid arguments to an operation (bad ranges, wrong counts).
struct ArgumentError : Error {
    using Error::Error;
};

// Shape or length mismatch; messages name both shapes.
struct DimensionError : ArgumentError {
    using ArgumentError::ArgumentError;
};

// Bad configuration: unknown keys, unparsable values, inconsistent settings.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed file contents (magic, version, truncation). Maps to the same
// exit code as ConfigError.
struct FormatError : ConfigError {
    using ConfigError::ConfigError;
};

// Filesystem level failures; messages carry the path.
struct IoError : Error {
    using Error::Error;
};

// Non-finite loss during training; message carries the step number.
struct DivergenceError : Error {
    using Error::Error;
};

// A documented invariant was violated by a caller (e.g. non-unit key).
struct ContractError : Error {
    using Error::Error;
};

}  // namespace seco

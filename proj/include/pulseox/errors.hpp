#pragma once

#include <stdexcept>

namespace pulseox {

// Value handed to an operation lies outside its documented domain.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed, contradictory, or unknown configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Least-squares fit could not produce a usable curve.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A benchmark session could not deliver the requested readings.
struct SessionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File or socket trouble.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace pulseox

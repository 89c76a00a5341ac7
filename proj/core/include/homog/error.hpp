#pragma once

#include <stdexcept>
#include <string>

namespace homog {

/// Invalid input or configuration. Command-line tools map this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite value, failed to converge, or hit a
/// singular system. Command-line tools map this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace homog

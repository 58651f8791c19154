#pragma once

#include <stdexcept>
#include <string>

namespace lps {

/// Invalid configuration or input (CLI exit code 2).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Solver instability or a degenerate numerical state (CLI exit code 3).
class NumericalAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File-system or serialisation failure (CLI exit code 4).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lps

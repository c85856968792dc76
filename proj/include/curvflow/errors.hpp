#pragma once

#include <stdexcept>
#include <string>

namespace curvflow {

/// Bad input: wrong shapes, invalid values, malformed files. CLI exit code 2.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: non-convergence, singular matrix, SPD violation. CLI exit code 3.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace curvflow

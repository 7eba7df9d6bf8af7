// errors.hpp — exception types shared by all modules
#pragma once

#include <stdexcept>
#include <string>

namespace psim {

// Invalid parameters, malformed configs, inconsistent inputs.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A numeric method could not reach its requested tolerance.
struct ToleranceError : std::runtime_error {
    explicit ToleranceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Request exceeds a configured size limit (dense form, enumeration, ...).
struct ResourceLimitError : std::runtime_error {
    explicit ResourceLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace psim

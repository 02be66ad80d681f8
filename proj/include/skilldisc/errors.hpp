#pragma once

#include <stdexcept>
#include <string>

namespace sd {

// Bad config file / invalid hyperparameters. CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing or malformed artifact (checkpoint, dataset, projection). CLI exit code 3.
struct ArtifactError : std::runtime_error {
    explicit ArtifactError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite losses or otherwise diverged numerics. CLI exit code 4.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Contract violations (dimension mismatches, out-of-range values).
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace sd

#pragma once

#include <stdexcept>
#include <string>

namespace treefanova {

// Invalid user-supplied configuration: bad flags, fractions, schemas.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data encountered during ingestion.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed, tampered or unsupported model files.
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures during model fitting (empty data, degenerate targets).
struct TrainError : std::runtime_error {
    explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace treefanova

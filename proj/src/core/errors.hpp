#pragma once

#include <stdexcept>
#include <string>

namespace lqcpg {

// Thrown when a solve or estimator breaks down (lost positivity, NaN,
// singular preconditioner, ...).  Maps to exit code 2 at the CLI.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown for malformed configs, unknown presets and bad file formats.
// Maps to exit code 1 at the CLI.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lqcpg

#pragma once

#include <stdexcept>
#include <string>

namespace cptmag {

// Exit-code taxonomy: 1 usage, 2 data, 3 non-convergence (0 = success).
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cptmag

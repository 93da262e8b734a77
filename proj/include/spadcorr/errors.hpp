#pragma once

#include <stdexcept>
#include <string>

namespace spadcorr {

// Parameter or file-content violations. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failures. The CLI maps this to exit code 3.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spadcorr

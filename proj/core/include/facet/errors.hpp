#pragma once

#include <stdexcept>
#include <string>

namespace facet {

// Raised when an input violates a documented precondition (bad dimension,
// malformed record, out-of-range parameter).  The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a file cannot be read, written or parsed at the byte level.
// The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace facet

// errors.hpp — Error types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace dephaser {

// Thrown when a value fails one of its declared invariants. `invariant()`
// names the check that failed (e.g. "hermiticity", "unit-trace", "psd").
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string invariant, const std::string& detail)
        : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

// Thrown on unreadable/unwritable files or malformed file contents.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& detail) : std::runtime_error(detail) {}
};

} // namespace dephaser

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ovsort {

/// Caller violated an operation's precondition (e.g. comparing keys of different length).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A sort or sampling parameter is out of range for the given input size.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A buffer cannot hold the requested data.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// A key file is malformed.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A post-sort check failed. `index()` is the first offending output position.
class VerificationError : public std::runtime_error {
public:
    VerificationError(const std::string& what, std::size_t index)
        : std::runtime_error(what + " (at index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

} // namespace ovsort

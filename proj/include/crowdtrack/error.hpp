#pragma once

#include <stdexcept>
#include <string>

namespace crowdtrack {

/// Raised when caller-supplied data violates a documented precondition
/// (non-finite costs, malformed files, duplicate ids, ...).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an API is driven out of its documented call protocol.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised when a numerical routine cannot proceed (singular matrices).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace crowdtrack

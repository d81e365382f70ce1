#pragma once

#include <stdexcept>
#include <string>

namespace dpre {

// Precondition violated by the caller (bad argument, wrong mode).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Integer count does not fit the 64-bit range.
class OutOfRangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// A work or memory guard was exceeded.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Overflow, divergence, bracket failure or a nonfinite intermediate.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dpre

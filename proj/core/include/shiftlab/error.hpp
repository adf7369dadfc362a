#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shiftlab {

/// Base class for every failure raised by the library. The CLI maps any
/// Error to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input or an invariant violation in a record.
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Prefixes a message with "<file>:<line>: " when a location is known.
std::string located(const std::string& file, std::size_t line, const std::string& message);

} // namespace shiftlab

#pragma once

#include <stdexcept>
#include <string>

namespace rfidzone {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (JSON, CSV, dotted quad, rule text).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input parsed but violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace rfidzone

#pragma once

#include <stdexcept>
#include <string>

namespace orthoconv {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

/// Non-finite values (NaN/Inf) encountered in input data.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

/// A documented operation precondition does not hold.
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& msg) : Error(msg) {}
};

/// A kernel failed the orthogonality validation required by the operation.
class InvalidKernelError : public Error {
public:
    explicit InvalidKernelError(const std::string& msg) : Error(msg) {}
};

/// Malformed or unsupported file contents.
class FileFormatError : public Error {
public:
    explicit FileFormatError(const std::string& msg) : Error(msg) {}
};

} // namespace orthoconv

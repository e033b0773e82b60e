// Exception hierarchy shared by all holo modules.
#pragma once

#include <stdexcept>
#include <string>

namespace holo {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Precondition violations: non-finite inputs, degenerate dimensions, bad ranges.
class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& msg) : Error(msg) {}
};

// Operands whose dimensions do not agree.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Non-finite values produced mid-computation; message carries the context.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Filesystem failures; message carries the path.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed file contents; message names the offending offset where known.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

}  // namespace holo

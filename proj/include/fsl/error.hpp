#pragma once

#include <stdexcept>
#include <string>

namespace fsl {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

// Raised for NaN/Inf in verification mode and non-finite training losses.
class NumericError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Episode or split preconditions not met by the dataset.
class SamplingError : public Error {
public:
    using Error::Error;
};

enum class FormatErrorKind {
    Io,
    BadMagic,
    UnsupportedVersion,
    Truncated,
    DimensionMismatch,
    Malformed,
};

const char* to_string(FormatErrorKind kind);

class FormatError : public Error {
public:
    FormatError(FormatErrorKind kind, const std::string& what)
        : Error(what), kind_(kind) {}

    FormatErrorKind kind() const noexcept { return kind_; }

private:
    FormatErrorKind kind_;
};

}  // namespace fsl

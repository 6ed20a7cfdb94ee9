#pragma once

#include <stdexcept>
#include <string>

namespace glr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, configuration documents or operator specifications.
/// The CLI maps these to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// MSFA masks that are not a pixelwise partition.
class OrthogonalityError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// An anchor that does not fit a patch inside the image.
class BoundsError : public Error {
public:
    BoundsError(const std::string& what, std::size_t index) : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class BadMagicError : public IoError {
public:
    using IoError::IoError;
};

class TruncatedError : public IoError {
public:
    using IoError::IoError;
};

class UnknownDtypeError : public IoError {
public:
    using IoError::IoError;
};

} // namespace glr

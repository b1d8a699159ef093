#pragma once

#include <stdexcept>
#include <string>

namespace dimer {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class NotUnimodular : public Error {
public:
    using Error::Error;
};

class Singular : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class NumericOverflow : public Error {
public:
    using Error::Error;
};

class InsufficientSignal : public Error {
public:
    using Error::Error;
};

class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}
    /// Index of the eigenvalue that failed to converge.
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class NonPositiveValues : public Error {
public:
    using Error::Error;
};

} // namespace dimer
